"""System models, one-bit sensor banks, and ground-truth simulation.

A bank of m sensors observes continuous sensed variables z_i but transmits
only the bit [z_i >= tau_i]. Models carry the sensor bank next to the
dynamics so the simulator and every filter share a single description.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigurationError
from .linalg import psd_sqrt, symmetrize


def _locked(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


def _check_psd(mat: np.ndarray, name: str) -> None:
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ConfigurationError(f"{name} must be square, got shape {mat.shape}")
    if not np.allclose(mat, mat.T, atol=1e-12):
        raise ConfigurationError(f"{name} must be symmetric")
    w = np.linalg.eigvalsh(symmetrize(mat))
    if w[0] < -1e-12 * max(np.trace(mat), 1.0):
        raise ConfigurationError(f"{name} must be positive semidefinite")


def _check_sensor_bank(E, R, tau, m, what):
    for name, arr in (("E", E), ("R", R), ("tau", tau)):
        if arr.shape != (m,):
            raise ConfigurationError(
                f"{what}: sensor array {name} must have shape ({m},), got {arr.shape}"
            )
    if np.any(R <= 0.0):
        raise ConfigurationError(f"{what}: every sensor noise power R must be > 0")


def binary_output(z: float, tau: float) -> int:
    """Bit emitted by one sensor: 1 exactly when the sensed value reaches the
    threshold (equality included)."""
    return int(z >= tau)


@dataclass(frozen=True)
class LinearModel:
    """x_k = A x_{k-1} + B u_{k-1} + C w_{k-1}, z_i = D_i x + E_i v_i.

    Parameters
    ----------
    A, B, C : arrays of shape (n, n), (n, p), (n, q)
        State transition, input gain, and process-noise gain.
    Q : (q, q) array
        Process-noise covariance, symmetric PSD.
    D : (m, n) array
        Stacked sensor rows, one per sensor.
    E, R, tau : (m,) arrays
        Sensor noise scaling, noise power (> 0), and bit threshold.
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    Q: np.ndarray
    D: np.ndarray
    E: np.ndarray
    R: np.ndarray
    tau: np.ndarray

    def __post_init__(self):
        A = _locked(np.atleast_2d(self.A))
        B = _locked(np.atleast_2d(self.B))
        C = _locked(np.atleast_2d(self.C))
        Q = _locked(np.atleast_2d(self.Q))
        D = _locked(np.atleast_2d(self.D))
        E = _locked(np.atleast_1d(self.E))
        R = _locked(np.atleast_1d(self.R))
        tau = _locked(np.atleast_1d(self.tau))
        n = A.shape[0]
        if A.shape != (n, n):
            raise ConfigurationError(f"A must be square, got {A.shape}")
        if B.shape[0] != n:
            raise ConfigurationError(f"B must have {n} rows, got {B.shape}")
        if C.shape[0] != n:
            raise ConfigurationError(f"C must have {n} rows, got {C.shape}")
        if Q.shape != (C.shape[1], C.shape[1]):
            raise ConfigurationError(
                f"Q must be {C.shape[1]}x{C.shape[1]} to match C, got {Q.shape}"
            )
        _check_psd(Q, "Q")
        if D.ndim != 2 or D.shape[1] != n or D.shape[0] < 1:
            raise ConfigurationError(f"D must be (m, {n}) with m >= 1, got {D.shape}")
        _check_sensor_bank(E, R, tau, D.shape[0], "LinearModel")
        for name, val in (("A", A), ("B", B), ("C", C), ("Q", Q), ("D", D),
                          ("E", E), ("R", R), ("tau", tau)):
            object.__setattr__(self, name, val)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def p(self) -> int:
        return self.B.shape[1]

    @property
    def q(self) -> int:
        return self.C.shape[1]

    @property
    def m(self) -> int:
        return self.D.shape[0]

    def transition(self, x: np.ndarray, u: np.ndarray) -> np.ndarray:
        return self.A @ x + self.B @ u

    def sense(self, x: np.ndarray) -> np.ndarray:
        """Noise-free sensed values for all m sensors."""
        return self.D @ x


@dataclass(frozen=True)
class NonlinearModel:
    """x_k = f(x_{k-1}, u_{k-1}) + C w_{k-1}, z_i = h_i(x) + E_i v_i.

    ``f`` maps (state, input) to the next noise-free state; ``h`` is one
    scalar sensed-variable map per sensor. Both must be total on the
    simulated state domain. ``n`` is declared because it cannot be inferred
    from the callables.
    """

    f: Callable[[np.ndarray, np.ndarray], np.ndarray]
    h: tuple
    C: np.ndarray
    Q: np.ndarray
    E: np.ndarray
    R: np.ndarray
    tau: np.ndarray
    n: int

    def __post_init__(self):
        C = _locked(np.atleast_2d(self.C))
        Q = _locked(np.atleast_2d(self.Q))
        E = _locked(np.atleast_1d(self.E))
        R = _locked(np.atleast_1d(self.R))
        tau = _locked(np.atleast_1d(self.tau))
        h = tuple(self.h)
        if len(h) < 1:
            raise ConfigurationError("NonlinearModel needs at least one sensor")
        if C.shape[0] != self.n:
            raise ConfigurationError(f"C must have {self.n} rows, got {C.shape}")
        if Q.shape != (C.shape[1], C.shape[1]):
            raise ConfigurationError(
                f"Q must be {C.shape[1]}x{C.shape[1]} to match C, got {Q.shape}"
            )
        _check_psd(Q, "Q")
        _check_sensor_bank(E, R, tau, len(h), "NonlinearModel")
        for name, val in (("h", h), ("C", C), ("Q", Q), ("E", E), ("R", R),
                          ("tau", tau)):
            object.__setattr__(self, name, val)

    @property
    def q(self) -> int:
        return self.C.shape[1]

    @property
    def m(self) -> int:
        return len(self.h)

    def transition(self, x: np.ndarray, u: np.ndarray) -> np.ndarray:
        return np.asarray(self.f(x, u), dtype=float)

    def sense(self, x: np.ndarray) -> np.ndarray:
        """Noise-free sensed values for all m sensors."""
        return np.array([hi(x) for hi in self.h], dtype=float)


@dataclass(frozen=True)
class Trajectory:
    """Simulated ground truth over k = 0..steps.

    ``states``/``sensed``/``bits`` have steps+1 rows (index k, row 0 is the
    initial condition); ``inputs`` has steps rows, inputs[k] drives the
    k -> k+1 transition. Filters consume bits[k] for k = 1..steps.
    """

    states: np.ndarray
    sensed: np.ndarray
    bits: np.ndarray
    inputs: np.ndarray

    @property
    def steps(self) -> int:
        return self.states.shape[0] - 1

    def checksum(self) -> int:
        """Content hash used to assert that filters never mutate a trajectory."""
        acc = 0
        for arr in (self.states, self.sensed, self.bits, self.inputs):
            acc = zlib.crc32(np.ascontiguousarray(arr).tobytes(), acc)
        return acc


def simulate(model, inputs: Sequence, x0: Sequence, seed: int, steps: int) -> Trajectory:
    """Simulate ``steps`` transitions of ``model`` driven by ``inputs``.

    Noise is Gaussian, drawn from one seeded generator family: the process
    noise and every sensor's measurement noise each use their own spawned
    substream, so adding or removing sensors never perturbs the process-noise
    sequence (and existing sensors keep their draws). The same arguments give
    a bit-identical trajectory.

    ``seed`` may be any 64-bit value (negative values are mapped to their
    unsigned representation).
    """
    if steps < 1:
        raise ConfigurationError(f"steps must be >= 1, got {steps}")
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    if x0.shape != (model_dim(model),):
        raise ConfigurationError(
            f"x0 must have shape ({model_dim(model)},), got {x0.shape}"
        )
    u = np.asarray(inputs, dtype=float)
    if u.ndim == 1:
        u = u[:, None]
    if u.shape[0] < steps:
        raise ConfigurationError(f"need at least {steps} inputs, got {u.shape[0]}")
    if isinstance(model, LinearModel) and u.shape[1] != model.p:
        raise ConfigurationError(
            f"inputs must have {model.p} columns to match B, got {u.shape[1]}"
        )
    u = u[:steps].copy()

    n, m, q = model_dim(model), model.m, model.q
    root = np.random.SeedSequence(int(seed) & 0xFFFFFFFFFFFFFFFF)
    streams = root.spawn(1 + m)
    w_rng = np.random.default_rng(streams[0])
    noise_w = w_rng.standard_normal((steps, q)) @ psd_sqrt(model.Q).T
    noise_v = np.empty((steps + 1, m))
    sd = np.sqrt(model.R)
    for i in range(m):
        noise_v[:, i] = np.random.default_rng(streams[1 + i]).standard_normal(steps + 1) * sd[i]

    states = np.empty((steps + 1, n))
    sensed = np.empty((steps + 1, m))
    states[0] = x0
    sensed[0] = model.sense(x0) + model.E * noise_v[0]
    for k in range(1, steps + 1):
        states[k] = model.transition(states[k - 1], u[k - 1]) + model.C @ noise_w[k - 1]
        sensed[k] = model.sense(states[k]) + model.E * noise_v[k]
    bits = (sensed >= model.tau).astype(np.int8)

    for arr in (states, sensed, bits, u):
        arr.setflags(write=False)
    return Trajectory(states=states, sensed=sensed, bits=bits, inputs=u)


def model_dim(model) -> int:
    """State dimension of either model kind."""
    return model.n
