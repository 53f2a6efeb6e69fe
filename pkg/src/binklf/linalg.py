"""Dense-algebra helpers: symmetric solves, factorizations, PSD guards.

Every matrix inverse in the filter equations is a solve against a symmetric
positive-definite matrix, so everything here goes through Cholesky and a
failed factorization carries the name of the violated constraint back to the
caller.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve, cholesky

from .errors import NumericalError


def symmetrize(mat: np.ndarray) -> np.ndarray:
    return 0.5 * (mat + mat.T)


def pd_solve(mat: np.ndarray, rhs: np.ndarray, constraint: str) -> np.ndarray:
    """Solve ``mat @ x = rhs`` for symmetric positive-definite ``mat``.

    ``constraint`` names the inequality that is supposed to guarantee
    positive definiteness; it is quoted in the diagnostic when the
    factorization fails.
    """
    try:
        factor = cho_factor(symmetrize(mat), lower=True)
    except (LinAlgError, ValueError) as exc:
        raise NumericalError(
            f"positive-definite solve failed; violated constraint: {constraint}"
        ) from exc
    return cho_solve(factor, rhs)


def chol_lower(cov: np.ndarray, what: str = "covariance") -> np.ndarray:
    """Lower-triangular Cholesky factor with a single jitter retry.

    A first failure gets a ridge of 1e-12 * trace/n added to the diagonal;
    a second failure raises.
    """
    cov = symmetrize(cov)
    try:
        return cholesky(cov, lower=True)
    except LinAlgError:
        pass
    n = cov.shape[0]
    ridge = 1e-12 * np.trace(cov) / n
    try:
        return cholesky(cov + ridge * np.eye(n), lower=True)
    except LinAlgError as exc:
        raise NumericalError(
            f"{what} is not positive definite even after jitter {ridge:.3e}"
        ) from exc


def psd_sqrt(mat: np.ndarray) -> np.ndarray:
    """Symmetric square root of a PSD matrix; tolerates exact singularity."""
    w, v = np.linalg.eigh(symmetrize(mat))
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.T


def ensure_psd(mat: np.ndarray, name: str = "covariance") -> np.ndarray:
    """Symmetrize and clamp round-off-negative eigenvalues at zero.

    Eigenvalues more negative than 1e-10 of the trace scale are a real
    failure, not round-off, and raise instead of being clamped.
    """
    sym = symmetrize(np.asarray(mat, dtype=float))
    w, v = np.linalg.eigh(sym)
    if w[0] >= 0.0:
        return sym
    floor = -1e-10 * max(np.trace(sym), 1.0)
    if w[0] < floor:
        raise NumericalError(
            f"{name} has eigenvalue {w[0]:.6e} below the round-off floor {floor:.6e}"
        )
    return symmetrize((v * np.clip(w, 0.0, None)) @ v.T)
