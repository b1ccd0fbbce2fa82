import logging

import numpy as np
import scipy.linalg

from evdiff.errors import RankDeficientError

logger = logging.getLogger(f"evdiff_logger.{__name__}")


def power_iteration(apply, n, tol=1e-8, max_iter=100000, seed=0):
    """Dominant eigenvalue of a symmetric PSD operator given as ``apply(x)``.

    Stops once the residual ``|A x - lam x|`` drops below ``tol * lam``.
    """
    rng = np.random.default_rng(seed)
    x = rng.normal(size=n)
    x /= np.linalg.norm(x)
    lam = 0.0
    for _ in range(max_iter):
        y = apply(x)
        y_norm = np.linalg.norm(y)
        if y_norm == 0:
            x = rng.normal(size=n)
            x /= np.linalg.norm(x)
            continue
        lam = float(x @ y)
        x_new = y / y_norm
        residual = np.linalg.norm(apply(x_new) - lam * x_new)
        x = x_new
        if residual <= tol * abs(lam):
            return lam
    logger.warning(f"Power iteration hit {max_iter} iterations before reaching tolerance {tol}")
    return lam


def lipschitz_and_condition(matrix, tol=1e-8, max_iter=100000, seed=0):
    """(L, kappa) of a full-column-rank matrix: sigma_max and sigma_max / sigma_min.

    Both extremes come from power iteration on A^T A and on its inverse
    (applied through a Cholesky factorisation).

    Raises:
        RankDeficientError: A lacks full column rank.
    """
    matrix = np.asarray(matrix, dtype=np.float64)
    n = matrix.shape[1]
    if matrix.shape[0] < n or np.linalg.matrix_rank(matrix) < n:
        raise RankDeficientError(f"Matrix {matrix.shape} lacks full column rank")
    gram = matrix.T @ matrix
    try:
        factor = scipy.linalg.cho_factor(gram)
    except np.linalg.LinAlgError as exc:
        raise RankDeficientError(f"A^T A is not positive definite: {exc}")

    top = power_iteration(lambda x: gram @ x, n, tol, max_iter, seed)
    inverse_top = power_iteration(lambda x: scipy.linalg.cho_solve(factor, x), n, tol, max_iter, seed)
    lipschitz = float(np.sqrt(top))
    sigma_min = float(1.0 / np.sqrt(inverse_top))
    return lipschitz, lipschitz / sigma_min
