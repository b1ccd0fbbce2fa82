from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from evdiff import custom_logger
from evdiff.diffusion.denoisers import ConditionalDenoiser, design_matrix, to_pixels
from evdiff.diffusion.schedule import lambda_weight
from evdiff.errors import NonFiniteError
from evdiff.events.stacking import EventVolume

OPTIMIZERS = ("gd", "adam", "lstsq")
GRAD_CHECK_COORDS = 10
GRAD_CHECK_TOL = 1e-4


@dataclass
class TrainConfig:
    iterations: int = 1000
    learning_rate: float = 0.01
    optimizer: str = "lstsq"
    draws: int = 8
    sigma_min: float = 0.002
    sigma_max: float = 80.0
    seed: int = 0
    log_every: int = 100
    check_gradients: bool = True

    def __post_init__(self):
        if self.iterations < 0 or self.learning_rate < 0:
            raise ValueError("iterations and learning_rate must be >= 0")
        if self.optimizer not in OPTIMIZERS:
            raise ValueError(f"Unknown optimizer '{self.optimizer}', expected one of {OPTIMIZERS}")
        if self.draws < 1:
            raise ValueError("draws must be >= 1")
        if not 0 < self.sigma_min < self.sigma_max:
            raise ValueError("Need 0 < sigma_min < sigma_max")


Sample = Tuple[np.ndarray, Optional[EventVolume]]


@dataclass
class TrainingBatch:
    features: np.ndarray
    targets: np.ndarray
    weights: np.ndarray


def build_batch(dataset: Sequence[Sample], sigma_data, draws, sigma_min, sigma_max, seed) -> TrainingBatch:
    """Fixed Monte-Carlo draws: sigma log-uniform on [sigma_min, sigma_max], Gaussian noise."""
    if not dataset:
        raise ValueError("Training dataset is empty")
    rng = np.random.default_rng(seed)
    features, targets, weights = [], [], []
    for x0, condition in dataset:
        x0 = np.asarray(getattr(x0, "data", x0), dtype=np.float64)
        for _ in range(draws):
            sigma = float(np.exp(rng.uniform(np.log(sigma_min), np.log(sigma_max))))
            noisy = x0 + sigma * rng.standard_normal(x0.shape)
            rows = design_matrix(noisy, sigma, condition, sigma_data)
            features.append(rows)
            targets.append(to_pixels(x0))
            weights.append(np.full(rows.shape[0], lambda_weight(sigma, sigma_data)))
    return TrainingBatch(np.vstack(features), np.vstack(targets), np.concatenate(weights))


def batch_loss(model: ConditionalDenoiser, batch: TrainingBatch, params=None):
    error = batch.targets - model.predict_rows(batch.features, params)
    return float(np.mean(batch.weights[:, None] * error ** 2))


def batch_gradient(model: ConditionalDenoiser, batch: TrainingBatch, params=None):
    error = batch.targets - model.predict_rows(batch.features, params)
    d_pred = -2.0 * batch.weights[:, None] * error / error.size
    return model.row_gradients(batch.features, d_pred, params)


def check_gradient(model: ConditionalDenoiser, batch: TrainingBatch, seed=None, step=1e-6):
    """Compare analytic gradients with central differences on random coordinates.

    Returns the worst relative error; raises RuntimeError above 1e-4.
    """
    rng = np.random.default_rng(seed)
    analytic = batch_gradient(model, batch)
    names = sorted(model.params)
    sizes = [model.params[name].size for name in names]
    worst = 0.0
    for flat in rng.choice(sum(sizes), size=min(GRAD_CHECK_COORDS, sum(sizes)), replace=False):
        which = int(np.searchsorted(np.cumsum(sizes), flat, side="right"))
        name, index = names[which], flat - (sum(sizes[:which]))
        shifted = {key: value.copy() for key, value in model.params.items()}
        original = shifted[name].flat[index]
        shifted[name].flat[index] = original + step
        upper = batch_loss(model, batch, shifted)
        shifted[name].flat[index] = original - step
        lower = batch_loss(model, batch, shifted)
        numeric = (upper - lower) / (2.0 * step)
        exact = analytic[name].flat[index]
        error = abs(numeric - exact) / max(abs(numeric), abs(exact), 1e-5)
        worst = max(worst, error)
    if worst > GRAD_CHECK_TOL:
        raise RuntimeError(f"Gradient check failed: relative error {worst:.3g} > {GRAD_CHECK_TOL}")
    custom_logger.debug(f"Gradient check passed, worst relative error {worst:.3g}")
    return worst


def _solve_weighted_lstsq(model, batch):
    if model.kind != "affine":
        raise ValueError("The lstsq optimizer only fits the affine denoiser")
    root = np.sqrt(batch.weights)[:, None]
    weight, *_ = scipy.linalg.lstsq(root * batch.features, root * batch.targets)
    model.params = {"weight": weight}


def train_denoiser(dataset: Sequence[Sample], model: ConditionalDenoiser, config: TrainConfig) -> ConditionalDenoiser:
    """Minimise the lambda-weighted denoising error E[lambda(sigma) * |x0 - D(x0 + sigma n)|^2].

    Args:
        dataset: (clean latent, event volume) pairs; a ``None`` volume means no events.
        model: toy denoiser, initialised from ``config.seed`` if it has no parameters.
        config: optimiser settings.

    Returns:
        The same model, trained in place, with ``history`` holding
        ``(iteration, loss)`` pairs at every logging interval.

    Raises:
        NonFiniteError: the loss became NaN or infinite.
        RuntimeError: the initial gradient check failed.
    """
    if not model.params:
        model.init_params(config.seed)
    batch = build_batch(dataset, model.sigma_data, config.draws, config.sigma_min, config.sigma_max, config.seed)
    if config.check_gradients:
        check_gradient(model, batch, seed=config.seed)

    loss = batch_loss(model, batch)
    model.history = [(0, loss)]
    custom_logger.info(f"Training {model.kind} denoiser ({config.optimizer}) on {batch.features.shape[0]} rows, "
                       f"initial loss {loss:.6g}")
    if config.iterations == 0:
        return model

    if config.optimizer == "lstsq":
        _solve_weighted_lstsq(model, batch)
        loss = batch_loss(model, batch)
        if not np.isfinite(loss):
            raise NonFiniteError("Non-finite loss after least-squares fit", step=1)
        model.history.append((1, loss))
        custom_logger.info(f"Least-squares fit loss {loss:.6g}")
        return model

    moments = {name: (np.zeros_like(p), np.zeros_like(p)) for name, p in model.params.items()}
    beta1, beta2, eps = 0.9, 0.999, 1e-8
    for iteration in range(1, config.iterations + 1):
        grads = batch_gradient(model, batch)
        for name, grad in grads.items():
            if config.optimizer == "gd":
                model.params[name] = model.params[name] - config.learning_rate * grad
                continue
            m, v = moments[name]
            m = beta1 * m + (1 - beta1) * grad
            v = beta2 * v + (1 - beta2) * grad ** 2
            moments[name] = (m, v)
            m_hat = m / (1 - beta1 ** iteration)
            v_hat = v / (1 - beta2 ** iteration)
            model.params[name] = model.params[name] - config.learning_rate * m_hat / (np.sqrt(v_hat) + eps)

        loss = batch_loss(model, batch)
        if not np.isfinite(loss):
            raise NonFiniteError("Training loss is not finite; lower the learning rate", step=iteration)
        if iteration % max(config.log_every, 1) == 0 or iteration == config.iterations:
            model.history.append((iteration, loss))
            custom_logger.info(f"iteration {iteration}: loss {loss:.6g}")
    return model


def denoising_loss(model: ConditionalDenoiser, dataset: Sequence[Sample], draws=8,
                   sigma_min=0.002, sigma_max=80.0, seed=None) -> float:
    """Held-out lambda-weighted loss on fresh draws."""
    batch = build_batch(dataset, model.sigma_data, draws, sigma_min, sigma_max, seed)
    return batch_loss(model, batch)


def zero_events(dataset: Sequence[Sample]) -> List[Sample]:
    """Same latents with every event volume replaced by zeros."""
    return [(x0, None if cond is None else EventVolume(np.zeros_like(cond.data))) for x0, cond in dataset]
