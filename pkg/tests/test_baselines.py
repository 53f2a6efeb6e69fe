"""Reference estimator tests: open loop, clairvoyant KF, switch filter."""

import numpy as np
import pytest

from binklf import (ConfigurationError, FilterState, LinearModel,
                    clairvoyant_kf_step, o2_scenario, open_loop_step,
                    simulate, switch_klf_step, switch_set)


def test_switch_set_examples():
    assert switch_set(np.array([1, 0, 1]), np.array([1, 1, 1])).indices == (1,)
    assert switch_set(np.array([0, 0]), np.array([0, 0])).size == 0
    assert switch_set(np.array([1, 0]), np.array([0, 1])).indices == (0, 1)


def test_switch_set_length_mismatch():
    with pytest.raises(ConfigurationError):
        switch_set(np.array([1, 0]), np.array([1]))


def test_open_loop_identity_system_is_frozen():
    model = LinearModel(A=np.eye(2), B=np.zeros((2, 1)), C=np.eye(2),
                        Q=np.zeros((2, 2)), D=np.ones((1, 2)),
                        E=np.ones(1), R=np.ones(1), tau=np.zeros(1))
    state = FilterState(np.array([3.0, -1.0]), 0.5 * np.eye(2))
    for _ in range(5):
        state = open_loop_step(state, model, np.zeros(1))
    assert np.array_equal(state.x_hat, [3.0, -1.0])
    assert np.allclose(state.Phi_hat, 0.5 * np.eye(2))


def test_open_loop_o2_covariance_fixed_point():
    # Stationary covariance of phi <- 0.5625*phi + 1 is 16/7.
    scenario = o2_scenario()
    state = scenario.initial_state()
    u = scenario.inputs(1)[0]
    for _ in range(400):
        state = open_loop_step(state, scenario.model, u)
    assert state.Phi_hat[0, 0] == pytest.approx(16.0 / 7.0, rel=1e-12)


def test_open_loop_monotone_in_process_noise():
    def model_with(q):
        return LinearModel(A=[[0.9, 0.1], [0.0, 0.8]], B=np.zeros((2, 1)),
                           C=np.eye(2), Q=q * np.eye(2), D=np.ones((1, 2)),
                           E=np.ones(1), R=np.ones(1), tau=np.zeros(1))

    lo = FilterState(np.zeros(2), np.eye(2))
    hi = FilterState(np.zeros(2), np.eye(2))
    for _ in range(50):
        lo = open_loop_step(lo, model_with(0.3), np.zeros(1))
        hi = open_loop_step(hi, model_with(0.6), np.zeros(1))
        assert np.trace(hi.Phi_hat) >= np.trace(lo.Phi_hat) - 1e-12


def test_clairvoyant_requires_linear_model():
    scenario = o2_scenario()
    with pytest.raises(ConfigurationError):
        clairvoyant_kf_step(scenario.initial_state(), object(), np.zeros(1),
                            np.zeros(10))


def test_clairvoyant_with_huge_noise_matches_open_loop():
    scenario = o2_scenario()
    model = scenario.model
    deaf = LinearModel(A=model.A, B=model.B, C=model.C, Q=model.Q, D=model.D,
                       E=model.E, R=1e12 * np.asarray(model.R), tau=model.tau)
    state = scenario.initial_state()
    u = scenario.inputs(1)[0]
    open_state = open_loop_step(state, model, u)
    kf_state = clairvoyant_kf_step(state, deaf, u, np.full(10, 63.75))
    assert kf_state.x_hat[0] == pytest.approx(open_state.x_hat[0], abs=1e-4)
    assert kf_state.Phi_hat[0, 0] == pytest.approx(open_state.Phi_hat[0, 0],
                                                   abs=1e-4)


def test_clairvoyant_with_tiny_noise_tracks_measurement():
    model = LinearModel(A=np.eye(2), B=np.zeros((2, 1)), C=np.eye(2),
                        Q=0.1 * np.eye(2), D=np.eye(2), E=np.ones(2),
                        R=np.full(2, 1e-12), tau=np.zeros(2))
    state = FilterState(np.zeros(2), np.eye(2))
    z = np.array([4.0, -2.5])
    out = clairvoyant_kf_step(state, model, np.zeros(1), z)
    assert np.allclose(out.x_hat, z, atol=1e-6)


def test_clairvoyant_covariance_never_above_open_loop():
    scenario = o2_scenario()
    traj = simulate(scenario.model, scenario.inputs(60), scenario.x0_true,
                    seed=11, steps=60)
    kf = scenario.initial_state()
    ol = scenario.initial_state()
    for k in range(1, 61):
        u = traj.inputs[k - 1]
        kf = clairvoyant_kf_step(kf, scenario.model, u, traj.sensed[k])
        ol = open_loop_step(ol, scenario.model, u)
        gap = np.linalg.eigvalsh(ol.Phi_hat - kf.Phi_hat)[0]
        assert gap >= -1e-10


def test_switch_requires_linear_model():
    with pytest.raises(ConfigurationError):
        switch_klf_step(FilterState(np.zeros(1), np.eye(1)), object(),
                        np.zeros(1), np.zeros(2), np.zeros(2), np.zeros(2))


def test_switch_validates_z_hat_prev_shape():
    scenario = o2_scenario()
    with pytest.raises(ConfigurationError):
        switch_klf_step(scenario.initial_state(), scenario.model,
                        scenario.inputs(1)[0], np.zeros(10), np.zeros(10),
                        np.zeros(3))


def test_switch_no_flips_returns_prediction():
    scenario = o2_scenario()
    state = scenario.initial_state()
    u = scenario.inputs(1)[0]
    y = np.ones(10)
    out = switch_klf_step(state, scenario.model, u, y, y, np.zeros(10))
    pred = open_loop_step(state, scenario.model, u)
    assert np.allclose(out.x_hat, pred.x_hat)
    assert np.allclose(out.Phi_hat, pred.Phi_hat)


def test_switch_zero_residual_keeps_prediction_mean():
    scenario = o2_scenario()
    model = scenario.model
    state = scenario.initial_state()
    u = scenario.inputs(1)[0]
    pred = open_loop_step(state, model, u)
    # Residual tau_i - 0.5*z_hat_prev_i - 0.5*d_i x_bar vanishes when
    # z_hat_prev_i = 2*tau_i - d_i x_bar.
    z_hat_prev = 2.0 * model.tau - (model.D @ pred.x_hat)
    y_prev = np.zeros(10)
    y = np.ones(10)
    out = switch_klf_step(state, model, u, y, y_prev, z_hat_prev)
    assert np.allclose(out.x_hat, pred.x_hat, atol=1e-10)


def test_switch_covariance_is_joseph_kf_posterior():
    scenario = o2_scenario()
    model = scenario.model
    state = scenario.initial_state()
    u = scenario.inputs(1)[0]
    pred = open_loop_step(state, model, u)
    y_prev = np.ones(10)
    y = y_prev.copy()
    y[4] = 0.0
    out = switch_klf_step(state, model, u, y, y_prev,
                          model.D @ state.x_hat)
    d = model.D[4:5, :]
    psi = float(model.E[4] ** 2 * model.R[4])
    p = pred.Phi_hat
    s = (d @ p @ d.T).item() + psi
    classical = p - (p @ d.T) @ (d @ p) / s
    assert np.allclose(out.Phi_hat, classical, atol=1e-12)
