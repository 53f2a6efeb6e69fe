"""Kalman-like filter for nonlinear models observed through one-bit sensors.

Same structure as the linear variant: unscented predictions replace the
linear ones, and the conservative covariance bound uses adjustable scalars
epsilon (sensed-side) and xi (cross-term) in place of alpha/beta. The bound
also carries an additive (1/xi) P_xz P_xz^T term, so the nonlinear bound does
not coincide with the linear one even on affine models.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .innovation import InnovationSet, innovation_set, predicted_bits
from .lbklf import FilterState
from .linalg import pd_solve, symmetrize
from .models import NonlinearModel
from .unscented import DEFAULT_UT, UtParams, ut_cross_covs, ut_predict_sensed, ut_predict_state

EPSILON_CONSTRAINT = "epsilon*I > P_zz (epsilon too small for the sensed-side bound)"
NBRACKET_CONSTRAINT = (
    "gain bracket P_zz + P_zz (eps*I - P_zz)^-1 P_zz + (eps+xi)*I must be PD "
    "(signals an epsilon/xi constraint violation upstream)"
)


@dataclass(frozen=True)
class NbklfStepReport:
    """Everything one nonlinear step produced, for inspection and oracles."""

    x_bar: np.ndarray
    P_bar: np.ndarray
    innovation: InnovationSet
    epsilon: float | None
    xi: float | None
    gain: np.ndarray | None
    P_xz: np.ndarray | None
    P_zz: np.ndarray | None
    new_state: FilterState
    wall_time: float


def compute_epsilon(P_zz: np.ndarray) -> float:
    """Trace-optimal sensed-side scalar: twice the largest eigenvalue.

    Floored so the strict inequality epsilon*I > P_zz survives P_zz ~ 0.
    """
    P_zz = np.atleast_2d(np.asarray(P_zz, dtype=float))
    lmax = max(float(np.linalg.eigvalsh(symmetrize(P_zz))[-1]), 0.0)
    floor = 1e-12 * (1.0 + float(np.trace(P_zz)))
    return max(2.0 * lmax, floor)


def choose_xi(P_xz: np.ndarray, scale: float = 1.0) -> float:
    """Cross-term scalar from the reference range (0, 2*Tr(P_xz P_xz^T)].

    The default sits at the midpoint; a floor keeps xi positive when the
    cross covariance vanishes.
    """
    from .errors import ConfigurationError

    if not 0.0 < scale <= 2.0:
        raise ConfigurationError(f"xi scale must lie in (0, 2], got {scale}")
    P_xz = np.atleast_2d(np.asarray(P_xz, dtype=float))
    energy = float(np.sum(P_xz ** 2))
    floor = 1e-12 * (1.0 + energy)
    return max(scale * energy, floor)


def nbklf_gain(P_xz, P_zz, epsilon, xi):
    """Trace-minimizing gain for the bounded covariance."""
    P_xz = np.atleast_2d(np.asarray(P_xz, dtype=float))
    P_zz = np.atleast_2d(np.asarray(P_zz, dtype=float))
    m_k = P_zz.shape[0]
    eye = np.eye(m_k)
    mid = pd_solve(epsilon * eye - P_zz, P_zz, EPSILON_CONSTRAINT)
    bracket = symmetrize(P_zz + P_zz @ mid + (epsilon + xi) * eye)
    return 2.0 * pd_solve(bracket, P_xz.T, NBRACKET_CONSTRAINT).T


def nbklf_update(x_bar, P_bar, inn: InnovationSet, gain, P_xz, P_zz,
                 epsilon, xi, z_bar_I):
    """Correct the unscented prediction with the innovation thresholds.

    ``z_bar_I`` is the unscented prediction of the innovation sensors'
    sensed values; the residual against the thresholds is exact because the
    unknown location term cancels in expectation.
    """
    P_xz = np.atleast_2d(np.asarray(P_xz, dtype=float))
    P_zz = np.atleast_2d(np.asarray(P_zz, dtype=float))
    m_k = inn.size
    eye = np.eye(m_k)
    residual = inn.tau - np.atleast_1d(np.asarray(z_bar_I, dtype=float))
    x_hat = x_bar + gain @ residual
    mid = pd_solve(epsilon * eye - P_zz, P_zz, EPSILON_CONSTRAINT)
    bracket = P_zz + P_zz @ mid + (epsilon + xi) * eye
    gpx = gain @ P_xz.T
    phi_hat = (P_bar - 0.5 * gpx.T - 0.5 * gpx
               + 0.25 * gain @ bracket @ gain.T
               + (1.0 / xi) * P_xz @ P_xz.T)
    return FilterState(x_hat, symmetrize(phi_hat))


def nbklf_step(prev: FilterState, model: NonlinearModel, u, y,
               xi_scale: float = 1.0,
               ut_params: UtParams = DEFAULT_UT) -> NbklfStepReport:
    """One full nonlinear filter step: unscented predict, classify, correct."""
    t0 = time.perf_counter()
    x_bar, p_bar, _ = ut_predict_state(prev, model.f, u, model.C, model.Q,
                                       params=ut_params)
    z_bar, resigma = ut_predict_sensed(x_bar, p_bar, model.h, params=ut_params)
    y_bar = predicted_bits(z_bar, model.tau)
    inn = innovation_set(y, y_bar, model)
    if inn.size == 0:
        epsilon = xi = gain = p_xz = p_zz = None
        new_state = FilterState(x_bar, p_bar)
    else:
        sel = list(inn.indices)
        p_xz, p_zz = ut_cross_covs(resigma, inn.h, z_bar[sel], inn.E, inn.R)
        epsilon = compute_epsilon(p_zz)
        xi = choose_xi(p_xz, scale=xi_scale)
        gain = nbklf_gain(p_xz, p_zz, epsilon, xi)
        new_state = nbklf_update(x_bar, p_bar, inn, gain, p_xz, p_zz,
                                 epsilon, xi, z_bar[sel])
    return NbklfStepReport(
        x_bar=x_bar,
        P_bar=p_bar,
        innovation=inn,
        epsilon=epsilon,
        xi=xi,
        gain=gain,
        P_xz=p_xz,
        P_zz=p_zz,
        new_state=new_state,
        wall_time=time.perf_counter() - t0,
    )
