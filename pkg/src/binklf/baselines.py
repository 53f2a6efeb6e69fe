"""Comparison estimators the binary-sensor filters are measured against.

Three reference points: an open-loop predictor (no measurement at all), a
clairvoyant Kalman filter that sees the continuous sensed values before
thresholding (performance floor), and a switch-based single-sensor filter
that corrects only on sensors whose bit flipped between consecutive steps,
ignoring the threshold-crossing uncertainty term.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .lbklf import FilterState, predict
from .linalg import symmetrize
from .models import LinearModel, NonlinearModel
from .unscented import DEFAULT_UT, ut_predict_state


@dataclass(frozen=True)
class SwitchSet:
    """Sensors whose output bit changed between step k-1 and step k.

    Built from consecutive outputs only, never from predictions; that is
    the defining difference from the innovation set.
    """

    indices: tuple

    @property
    def size(self) -> int:
        return len(self.indices)


def switch_set(y: np.ndarray, y_prev: np.ndarray) -> SwitchSet:
    y = np.asarray(y).ravel()
    y_prev = np.asarray(y_prev).ravel()
    if y.shape != y_prev.shape:
        raise ConfigurationError(
            f"bit vectors disagree in length: {y.shape} vs {y_prev.shape}")
    return SwitchSet(indices=tuple(int(i) for i in np.flatnonzero(y != y_prev)))


def open_loop_step(prev: FilterState, model, u) -> FilterState:
    """Prediction only; the bits are never consulted."""
    if isinstance(model, LinearModel):
        x_bar, phi_bar = predict(prev, model, u)
        return FilterState(x_bar, phi_bar)
    if isinstance(model, NonlinearModel):
        x_bar, p_bar, _ = ut_predict_state(prev, model.f, u, model.C, model.Q,
                                           params=DEFAULT_UT)
        return FilterState(x_bar, p_bar)
    raise ConfigurationError(f"unsupported model type {type(model).__name__}")


def clairvoyant_kf_step(prev: FilterState, model: LinearModel, u,
                        z: np.ndarray) -> FilterState:
    """Textbook Kalman update on the un-thresholded sensed vector z.

    Joseph-form covariance so the recursion stays PSD regardless of gain.
    """
    if not isinstance(model, LinearModel):
        raise ConfigurationError(
            "clairvoyant baseline requires a linear model")
    z = np.asarray(z, dtype=float).ravel()
    if z.shape != (model.m,):
        raise ConfigurationError(
            f"sensed vector has shape {z.shape}, expected ({model.m},)")
    x_bar, phi_bar = predict(prev, model, u)
    d = model.D
    r_eff = np.diag(model.E ** 2 * model.R)
    s = d @ phi_bar @ d.T + r_eff
    gain = np.linalg.solve(s.T, (phi_bar @ d.T).T).T
    x_hat = x_bar + gain @ (z - d @ x_bar)
    closed = np.eye(model.n) - gain @ d
    phi_hat = closed @ phi_bar @ closed.T + gain @ r_eff @ gain.T
    return FilterState(x_hat, symmetrize(phi_hat))


def switch_klf_step(prev: FilterState, model: LinearModel, u,
                    y: np.ndarray, y_prev: np.ndarray,
                    z_hat_prev: np.ndarray) -> FilterState:
    """Switch-based correction: one sequential update per flipped bit.

    Each switched sensor i contributes the residual
    tau_i - 0.5*z_hat_prev[i] - 0.5*(d_i @ x), with the second prediction
    taken from the running state so that simultaneous switches compose
    deterministically (ascending index order). The gain doubles the
    classical Kalman gain because the residual carries half-weights; the
    resulting covariance recursion is exactly the Joseph-form posterior.
    """
    if not isinstance(model, LinearModel):
        raise ConfigurationError("switch baseline requires a linear model")
    z_hat_prev = np.asarray(z_hat_prev, dtype=float).ravel()
    if z_hat_prev.shape != (model.m,):
        raise ConfigurationError(
            f"z_hat_prev has shape {z_hat_prev.shape}, expected ({model.m},)")
    x_bar, phi_bar = predict(prev, model, u)
    switched = switch_set(y, y_prev)
    x = x_bar.copy()
    p = phi_bar.copy()
    eye = np.eye(model.n)
    for i in switched.indices:
        d_row = model.D[i:i + 1, :]
        psi = float(model.E[i] ** 2 * model.R[i])
        s = (d_row @ p @ d_row.T).item() + psi
        gain = 2.0 * (p @ d_row.T) / s
        residual = float(model.tau[i]) - 0.5 * z_hat_prev[i] - 0.5 * (d_row @ x).item()
        x = x + (gain * residual).ravel()
        closed = eye - 0.5 * gain @ d_row
        p = symmetrize(closed @ p @ closed.T + 0.25 * psi * (gain @ gain.T))
    return FilterState(x, p)
