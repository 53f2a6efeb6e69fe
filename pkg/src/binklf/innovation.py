"""Predicted bits and the innovation set.

A sensor carries information only when its transmitted bit disagrees with
the bit the filter would have predicted from its own one-step prediction.
The innovation set collects those sensors and stacks their rows, noise
parameters, and thresholds so the update works on the reduced bank.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ConfigurationError
from .models import LinearModel, NonlinearModel


@dataclass(frozen=True)
class InnovationSet:
    """Sensors whose actual bit disagrees with the predicted bit.

    ``indices`` are 0-based positions into the model's sensor arrays, in
    ascending order. ``D`` stacks the member rows for linear banks; ``h`` is
    the stacked sensed map for nonlinear banks (exactly one of the two is
    set). ``E``/``R``/``tau`` hold the members' noise scaling, noise power,
    and thresholds in the same order.
    """

    indices: tuple
    E: np.ndarray
    R: np.ndarray
    tau: np.ndarray
    D: np.ndarray | None = None
    h: Callable[[np.ndarray], np.ndarray] | None = None

    @property
    def size(self) -> int:
        return len(self.indices)

    def noise_power(self) -> np.ndarray:
        """Diagonal covariance of the stacked measurement noise, E R E^T."""
        return np.diag(self.E ** 2 * self.R)


def predicted_bits(z_bar: np.ndarray, taus: np.ndarray) -> np.ndarray:
    """Bits the sensors would emit if the sensed values equalled ``z_bar``.

    The threshold test is inclusive: a predicted value exactly at the
    threshold predicts bit 1.
    """
    z_bar = np.atleast_1d(np.asarray(z_bar, dtype=float))
    taus = np.atleast_1d(np.asarray(taus, dtype=float))
    if z_bar.shape != taus.shape:
        raise ConfigurationError(
            f"predicted values and thresholds must match, got {z_bar.shape} vs {taus.shape}"
        )
    return (z_bar >= taus).astype(np.int8)


def innovation_set(y: np.ndarray, y_bar: np.ndarray, model) -> InnovationSet:
    """Collect the sensors where ``y`` and ``y_bar`` disagree.

    An empty set is a normal outcome (the filters then keep their
    prediction); all stacked quantities follow ascending sensor order.
    """
    y = np.atleast_1d(np.asarray(y))
    y_bar = np.atleast_1d(np.asarray(y_bar))
    if y.shape != y_bar.shape:
        raise ConfigurationError(
            f"bit vectors must have equal length, got {y.shape} vs {y_bar.shape}"
        )
    idx = tuple(int(i) for i in np.flatnonzero(y != y_bar))
    sel = list(idx)
    common = dict(
        indices=idx,
        E=model.E[sel],
        R=model.R[sel],
        tau=model.tau[sel],
    )
    if isinstance(model, LinearModel):
        return InnovationSet(D=model.D[sel], **common)
    if isinstance(model, NonlinearModel):
        members = tuple(model.h[i] for i in idx)

        def h_stack(x: np.ndarray) -> np.ndarray:
            return np.array([hi(x) for hi in members], dtype=float)

        return InnovationSet(h=h_stack, **common)
    raise ConfigurationError(f"unsupported model type {type(model).__name__}")
