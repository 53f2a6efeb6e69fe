"""Unscented transform: sigma points, weights, and moment predictions.

Sigma points are drawn symmetrically around the center from the columns of a
lower-triangular factor of (n + eta) * cov, with eta = a^2 (n + kappa) - n.
With the default constants (a=1, b=2, kappa=0) the spread parameter eta is 0:
the center point stays in the set with mean weight 0 and covariance weight 2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .lbklf import FilterState
from .linalg import chol_lower, symmetrize


@dataclass(frozen=True)
class UtParams:
    a: float = 1.0
    b: float = 2.0
    kappa: float = 0.0

    def eta(self, n: int) -> float:
        return self.a ** 2 * (n + self.kappa) - n


DEFAULT_UT = UtParams()


@dataclass(frozen=True)
class SigmaSet:
    """2n+1 points with mean and covariance weights.

    ``points[0]`` is the generating center; construction guarantees the other
    points come in +/- pairs around it. Propagated sets (points mapped through
    a dynamics function) reuse this container without those guarantees.
    """

    points: np.ndarray
    mean_weights: np.ndarray
    cov_weights: np.ndarray
    params: UtParams

    @property
    def center(self) -> np.ndarray:
        return self.points[0]


def sigma_points(center: np.ndarray, cov: np.ndarray,
                 params: UtParams = DEFAULT_UT) -> SigmaSet:
    """Sample 2n+1 sigma points around ``center`` for covariance ``cov``.

    A near-singular covariance gets one jittered factorization retry before
    failing.
    """
    center = np.atleast_1d(np.asarray(center, dtype=float))
    cov = np.atleast_2d(np.asarray(cov, dtype=float))
    n = center.size
    eta = params.eta(n)
    if n + eta <= 0.0:
        raise ConfigurationError(
            f"sigma-point scaling n + eta must be positive, got {n + eta}"
        )
    root = chol_lower((n + eta) * cov, what="sigma-point covariance")

    pts = np.empty((2 * n + 1, n))
    pts[0] = center
    pts[1:n + 1] = center - root.T
    pts[n + 1:] = center + root.T

    wm = np.full(2 * n + 1, 1.0 / (2.0 * (n + eta)))
    wm[0] = eta / (n + eta)
    wc = wm.copy()
    wc[0] = wm[0] + (1.0 - params.a ** 2 + params.b)
    return SigmaSet(points=pts, mean_weights=wm, cov_weights=wc, params=params)


def ut_predict_state(prev: FilterState, f, u, C, Q,
                     params: UtParams = DEFAULT_UT):
    """Propagate the posterior through the dynamics map.

    Returns the predicted mean, the predicted covariance (process noise
    added, symmetrized), and the propagated sigma set.
    """
    C = np.atleast_2d(np.asarray(C, dtype=float))
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    sig = sigma_points(prev.x_hat, prev.Phi_hat, params)
    prop = np.array([np.asarray(f(pt, u), dtype=float) for pt in sig.points])
    x_bar = sig.mean_weights @ prop
    dev = prop - x_bar
    p_bar = symmetrize(dev.T @ (sig.cov_weights[:, None] * dev) + C @ Q @ C.T)
    propagated = SigmaSet(points=prop, mean_weights=sig.mean_weights,
                          cov_weights=sig.cov_weights, params=params)
    return x_bar, p_bar, propagated


def ut_predict_sensed(x_bar, P_bar, h_list, params: UtParams = DEFAULT_UT):
    """Predict every sensor's sensed value from fresh sigma points.

    The points are re-drawn around (x_bar, P_bar) rather than reused from the
    propagation stage; the same set is returned for the cross-covariance
    stage.
    """
    x_bar = np.atleast_1d(np.asarray(x_bar, dtype=float))
    sig = sigma_points(x_bar, P_bar, params)
    m = len(h_list)
    if m == 0:
        return np.empty(0), sig
    vals = np.array([[float(h(pt)) for h in h_list] for pt in sig.points])
    z_bar = sig.mean_weights @ vals
    return z_bar, sig


def ut_cross_covs(resigma: SigmaSet, h_I, z_bar_I, E_I, R_I):
    """State/sensed and sensed/sensed covariances over the innovation subset.

    ``h_I`` is the stacked sensed map of the subset; ``z_bar_I`` its
    predicted values. The stacked measurement-noise covariance E R E^T is
    added to the sensed/sensed block, which is then symmetrized.
    """
    z_bar_I = np.atleast_1d(np.asarray(z_bar_I, dtype=float))
    E_I = np.atleast_1d(np.asarray(E_I, dtype=float))
    R_I = np.atleast_1d(np.asarray(R_I, dtype=float))
    pts = resigma.points
    hvals = np.array([np.atleast_1d(np.asarray(h_I(pt), dtype=float)) for pt in pts])
    dx = pts - resigma.center
    dz = hvals - z_bar_I
    wc = resigma.cov_weights[:, None]
    p_xz = dx.T @ (wc * dz)
    p_zz = symmetrize(dz.T @ (wc * dz)) + np.diag(E_I ** 2 * R_I)
    return p_xz, p_zz
