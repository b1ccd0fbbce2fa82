"""L1 inter-frame residual loss and its subgradient through the decoder."""
import numpy as np

from evdiff.errors import ShapeMismatchError
from evdiff.sampler.decoder import Decoder


def _residual_array(r):
    return np.asarray(getattr(r, "data", r), dtype=np.float64)


def _deviation(u, r, decoder: Decoder):
    """Delta D(U)_k - R_k for k = 0..F-2."""
    frames = decoder.apply(np.asarray(getattr(u, "data", u), dtype=np.float64))
    target = _residual_array(r)
    diffs = np.diff(frames, axis=0)
    if diffs.shape != target.shape:
        raise ShapeMismatchError(f"Decoded differences {diffs.shape} vs residual {target.shape}")
    return diffs - target


def residual_loss(u, r, decoder: Decoder) -> float:
    """sum |D(U_{k+1}) - D(U_k) - R_k| over every gap and element."""
    return float(np.abs(_deviation(u, r, decoder)).sum())


def difference_adjoint(g: np.ndarray) -> np.ndarray:
    """Adjoint of the forward difference: frame f gets g_{f-1} - g_f."""
    out = np.zeros((g.shape[0] + 1,) + g.shape[1:])
    out[1:] += g
    out[:-1] -= g
    return out


def residual_grad(u, r, decoder: Decoder) -> np.ndarray:
    """Subgradient of :func:`residual_loss` w.r.t. the latent, with sign(0) = 0."""
    return decoder.adjoint(difference_adjoint(np.sign(_deviation(u, r, decoder))))


def guide(u, r, s, decoder: Decoder) -> np.ndarray:
    """U - s * grad L_residual(U)."""
    if s < 0:
        raise ValueError(f"Guidance strength must be >= 0, got {s}")
    u = np.asarray(getattr(u, "data", u), dtype=np.float64)
    if s == 0:
        return u.copy()
    return u - s * residual_grad(u, r, decoder)


def descent_strength(u, r, decoder: Decoder, s, shrink=0.5, max_halvings=60) -> float:
    """Largest s * shrink^j (j <= max_halvings) whose guided step does not raise the loss; 0 if none."""
    base = residual_loss(u, r, decoder)
    for _ in range(max_halvings + 1):
        if s == 0 or residual_loss(guide(u, r, s, decoder), r, decoder) <= base:
            return s
        s *= shrink
    return 0.0
