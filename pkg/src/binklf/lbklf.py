"""Kalman-like filter for linear models observed through one-bit sensors.

One step is: predict, classify which bits carry innovation, and correct
using thresholds as pseudo-measurements. The transmitted bit only localizes
the sensed value relative to the threshold, and where it sits between the
last two sensed values is unknown; that unknown enters the error dynamics as
a diagonal uncertainty with entries in (-0.5, 0.5). The update therefore
tracks a conservative covariance bound Phi_hat, valid for every admissible
uncertainty, built from two matrix-inequality bounds with adjustable scalars
alpha (measurement side) and beta (state side). The gain minimizes the trace
of that bound.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .innovation import InnovationSet, innovation_set, predicted_bits
from .linalg import ensure_psd, pd_solve, symmetrize
from .models import LinearModel

ALPHA_CONSTRAINT = "alpha*I > Psi (alpha too small for the measurement-noise bound)"
BETA_CONSTRAINT = "beta*I > D Phi_bar D^T (beta too small for the prediction bound)"
BRACKET_CONSTRAINT = (
    "gain bracket D Upsilon D^T + beta*I + Xi must be PD "
    "(signals an alpha/beta constraint violation upstream)"
)


@dataclass(frozen=True)
class FilterState:
    """State estimate with its conservative error-covariance bound.

    ``Phi_hat`` is symmetrized on construction; eigenvalues that are
    negative beyond round-off raise, tiny negative ones are clamped to zero.
    """

    x_hat: np.ndarray
    Phi_hat: np.ndarray

    def __post_init__(self):
        x = np.atleast_1d(np.asarray(self.x_hat, dtype=float))
        phi = ensure_psd(np.atleast_2d(np.asarray(self.Phi_hat, dtype=float)),
                         name="Phi_hat")
        if phi.shape != (x.size, x.size):
            raise ConfigurationError(
                f"Phi_hat must be {x.size}x{x.size}, got {phi.shape}"
            )
        object.__setattr__(self, "x_hat", x)
        object.__setattr__(self, "Phi_hat", phi)


@dataclass(frozen=True)
class LbklfStepReport:
    """Everything one step produced, for inspection and test oracles."""

    x_bar: np.ndarray
    Phi_bar: np.ndarray
    innovation: InnovationSet
    alpha: float | None
    beta: float | None
    gain: np.ndarray | None
    new_state: FilterState
    wall_time: float


def predict(prev: FilterState, model: LinearModel, u: np.ndarray):
    """One-step prediction of the state and the covariance bound."""
    u = np.atleast_1d(np.asarray(u, dtype=float))
    x_bar = model.A @ prev.x_hat + model.B @ u
    phi_bar = symmetrize(model.A @ prev.Phi_hat @ model.A.T
                         + model.C @ model.Q @ model.C.T)
    return x_bar, phi_bar


def compute_alpha(Psi: np.ndarray) -> float:
    """Trace-optimal measurement-side scalar: twice the largest noise power.

    A floor keeps the strict inequality alpha*I > Psi alive when the bank is
    noise-free (Psi = 0).
    """
    Psi = np.atleast_2d(np.asarray(Psi, dtype=float))
    d = np.diag(Psi)
    if np.any(Psi != np.diag(d)) or np.any(d < 0.0):
        raise ConfigurationError("Psi must be diagonal with nonnegative entries")
    floor = 1e-12 * (1.0 + float(np.sum(d)))
    return max(2.0 * float(np.max(d)), floor)


def choose_beta(DPhiD: np.ndarray, scale: float = 2.0) -> float:
    """State-side scalar from its admissible range (lmax, 2*lmax].

    ``scale`` picks the point in that range (default: the top). The same
    floor rule as for alpha covers the degenerate DPhiD = 0 case.
    """
    if not 1.0 < scale <= 2.0:
        raise ConfigurationError(f"beta scale must lie in (1, 2], got {scale}")
    DPhiD = np.atleast_2d(np.asarray(DPhiD, dtype=float))
    lmax = max(float(np.linalg.eigvalsh(symmetrize(DPhiD))[-1]), 0.0)
    floor = 1e-12 * (1.0 + float(np.trace(DPhiD)))
    return max(scale * lmax, floor)


def lbklf_gain(Phi_bar, D_I, Psi, alpha, beta):
    """Trace-minimizing gain for the bounded covariance, with its two
    intermediate bound matrices.

    Returns ``(gain, Upsilon, Xi)`` where Upsilon bounds the prediction-side
    quadratic and Xi the measurement-side one. Both solves are against
    symmetric PD matrices; a failed factorization names the violated
    constraint.
    """
    Phi_bar = np.atleast_2d(np.asarray(Phi_bar, dtype=float))
    D_I = np.atleast_2d(np.asarray(D_I, dtype=float))
    Psi = np.atleast_2d(np.asarray(Psi, dtype=float))
    m_k = D_I.shape[0]
    eye = np.eye(m_k)

    dphi = D_I @ Phi_bar
    ups = symmetrize(Phi_bar + dphi.T @ pd_solve(beta * eye - dphi @ D_I.T,
                                                 dphi, BETA_CONSTRAINT))
    xi_mat = symmetrize(Psi + Psi @ pd_solve(alpha * eye - Psi, Psi,
                                             ALPHA_CONSTRAINT) + alpha * eye)
    bracket = symmetrize(D_I @ ups @ D_I.T + beta * eye + xi_mat)
    gain = 2.0 * pd_solve(bracket, D_I @ ups, BRACKET_CONSTRAINT).T
    return gain, ups, xi_mat


def lbklf_update(x_bar, Phi_bar, inn: InnovationSet, gain, Upsilon, Xi, beta):
    """Correct the prediction with the innovation sensors' thresholds.

    The uncertain location of the sensed value cancels out of the residual,
    leaving tau_I - D_I x_bar with a 0.5 weight absorbed into the gain.
    """
    m_k = inn.size
    residual = inn.tau - inn.D @ x_bar
    x_hat = x_bar + gain @ residual
    bracket = inn.D @ Upsilon @ inn.D.T + beta * np.eye(m_k) + Xi
    gdu = gain @ inn.D @ Upsilon
    phi_hat = 0.25 * gain @ bracket @ gain.T - 0.5 * gdu.T - 0.5 * gdu + Upsilon
    return FilterState(x_hat, symmetrize(phi_hat))


def lbklf_step(prev: FilterState, model: LinearModel, u, y,
               beta_scale: float = 2.0) -> LbklfStepReport:
    """One full filter step: predict, classify bits, correct.

    When no bit disagrees with its prediction the step keeps the prediction
    unchanged (there is nothing to correct).
    """
    t0 = time.perf_counter()
    x_bar, phi_bar = predict(prev, model, u)
    y_bar = predicted_bits(model.D @ x_bar, model.tau)
    inn = innovation_set(y, y_bar, model)
    if inn.size == 0:
        alpha = beta = gain = None
        new_state = FilterState(x_bar, phi_bar)
    else:
        psi = inn.noise_power()
        alpha = compute_alpha(psi)
        beta = choose_beta(inn.D @ phi_bar @ inn.D.T, scale=beta_scale)
        gain, ups, xi_mat = lbklf_gain(phi_bar, inn.D, psi, alpha, beta)
        new_state = lbklf_update(x_bar, phi_bar, inn, gain, ups, xi_mat, beta)
    return LbklfStepReport(
        x_bar=x_bar,
        Phi_bar=phi_bar,
        innovation=inn,
        alpha=alpha,
        beta=beta,
        gain=gain,
        new_state=new_state,
        wall_time=time.perf_counter() - t0,
    )
