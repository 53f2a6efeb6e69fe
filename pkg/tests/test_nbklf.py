"""Nonlinear filter unit tests.

Scalar pinned values frozen from exact rational arithmetic over the gain and
covariance formulas, computed before implementation.
"""

import numpy as np
import pytest

from binklf import (ConfigurationError, FilterState, LinearModel,
                    NonlinearModel, choose_xi, compute_epsilon,
                    dominance_oracle, innovation_set, lbklf_step, nbklf_gain,
                    nbklf_step, nbklf_update, nonlinear_scenario,
                    parameter_scan_oracle, predicted_bits,
                    random_nonlinear_instance, simulate, trace_objective,
                    ut_predict_sensed)

# Scalar pinned case: P_xz=1/2, P_zz=13/50, eps=13/25, xi=1/4, P_bar=1.
PIN_GAIN = 0.77519379844961245   # 100/129
PIN_PHI_HAT = 1.806201550387597  # 233/129


def test_epsilon_examples():
    assert compute_epsilon(np.diag([1.0, 4.0])) == pytest.approx(8.0, abs=0.0)
    assert compute_epsilon(np.array([[0.01]])) == pytest.approx(0.02, abs=0.0)
    floor = compute_epsilon(np.zeros((2, 2)))
    assert 0.0 < floor < 1e-10


def test_epsilon_exceeds_top_eigenvalue():
    rng = np.random.default_rng(0)
    for _ in range(10):
        root = rng.normal(size=(3, 3))
        p_zz = root @ root.T
        eps = compute_epsilon(p_zz)
        assert eps > np.linalg.eigvalsh(p_zz)[-1]


def test_xi_examples():
    assert choose_xi(np.array([[1.0], [0.0]])) == pytest.approx(1.0, abs=0.0)
    floor = choose_xi(np.zeros((2, 1)))
    assert 0.0 < floor < 1e-10


def test_xi_stays_in_reference_range():
    rng = np.random.default_rng(1)
    for _ in range(10):
        p_xz = rng.normal(size=(3, 2))
        xi = choose_xi(p_xz)
        assert 0.0 < xi <= 2.0 * np.trace(p_xz @ p_xz.T) + 1e-15


@pytest.mark.parametrize("scale", [0.0, -1.0, 2.5])
def test_xi_scale_range_validated(scale):
    with pytest.raises(ConfigurationError):
        choose_xi(np.ones((1, 1)), scale=scale)


def test_gain_scalar_pinned():
    gain = nbklf_gain(np.array([[0.5]]), np.array([[0.26]]), 0.52, 0.25)
    assert gain[0, 0] == pytest.approx(PIN_GAIN, rel=1e-14)


def test_gain_zero_cross_covariance():
    gain = nbklf_gain(np.zeros((2, 1)), np.array([[0.3]]), 0.6, 0.1)
    assert np.allclose(gain, 0.0)


def scalar_bank():
    # One-sensor nonlinear bank whose prediction stage is exactly affine.
    return NonlinearModel(f=lambda x, u: x + u, h=(lambda x: float(x[0]),),
                          C=[[1.0]], Q=[[0.0]], E=np.ones(1),
                          R=np.array([0.01]), tau=np.zeros(1), n=1)


def test_update_pinned_posterior():
    inn = innovation_set(np.array([1]), np.array([0]), scalar_bank())
    state = nbklf_update(np.array([3.0]), np.array([[1.0]]), inn,
                         np.array([[PIN_GAIN]]), np.array([[0.5]]),
                         np.array([[0.26]]), 0.52, 0.25,
                         z_bar_I=np.array([4.0]))
    assert state.Phi_hat[0, 0] == pytest.approx(PIN_PHI_HAT, rel=1e-14)
    # residual = tau - z_bar = 0 - 4
    assert state.x_hat[0] == pytest.approx(3.0 - 4.0 * PIN_GAIN, rel=1e-12)


def test_update_zero_gain():
    inn = innovation_set(np.array([1]), np.array([0]), scalar_bank())
    p_xz = np.array([[0.5]])
    state = nbklf_update(np.array([3.0]), np.array([[1.0]]), inn,
                         np.zeros((1, 1)), p_xz, np.array([[0.26]]),
                         0.52, 0.25, z_bar_I=np.array([4.0]))
    assert state.x_hat[0] == pytest.approx(3.0)
    assert state.Phi_hat[0, 0] == pytest.approx(1.0 + 4.0 * 0.25, rel=1e-14)


def test_update_zero_residual():
    inn = innovation_set(np.array([1]), np.array([0]), scalar_bank())
    state = nbklf_update(np.array([3.0]), np.array([[1.0]]), inn,
                         np.array([[PIN_GAIN]]), np.array([[0.5]]),
                         np.array([[0.26]]), 0.52, 0.25,
                         z_bar_I=inn.tau.copy())
    assert state.x_hat[0] == pytest.approx(3.0)


def test_step_all_bits_agree_returns_prediction():
    model = scalar_bank()
    state = FilterState(np.array([5.0]), np.array([[0.2]]))
    # f(x, u) = x + u with u = 0 keeps the prediction at 5, above tau = 0.
    report = nbklf_step(state, model, np.zeros(1), np.array([1]))
    assert report.innovation.size == 0
    assert report.gain is None
    assert np.allclose(report.new_state.x_hat, report.x_bar)
    assert np.allclose(report.new_state.Phi_hat, report.P_bar)


def test_affine_model_matches_linear_filter_prediction():
    rng = np.random.default_rng(3)
    n, m = 2, 3
    A = 0.7 * rng.normal(size=(n, n))
    B = rng.normal(size=(n, 1))
    C = rng.normal(size=(n, n))
    Q = np.eye(n)
    D = rng.normal(size=(m, n))
    E = rng.uniform(0.5, 1.5, m)
    R = rng.uniform(0.05, 0.5, m)
    x_hat = rng.normal(size=n)
    phi = np.eye(n)
    u = rng.normal(size=1)
    x_bar = A @ x_hat + B @ u
    tau = D @ x_bar + rng.uniform(-0.2, 0.2, size=m)

    linear = LinearModel(A=A, B=B, C=C, Q=Q, D=D, E=E, R=R, tau=tau)
    rows = [(lambda d: lambda x: float(d @ x))(D[i]) for i in range(m)]
    bent = NonlinearModel(f=lambda x, uu: A @ x + B @ np.asarray(uu, float),
                          h=tuple(rows), C=C, Q=Q, E=E, R=R, tau=tau, n=n)

    y = 1 - predicted_bits(D @ x_bar, tau)
    rep_l = lbklf_step(FilterState(x_hat, phi), linear, u, y)
    rep_n = nbklf_step(FilterState(x_hat, phi), bent, u, y)

    assert np.allclose(rep_n.x_bar, rep_l.x_bar, atol=1e-8)
    assert np.allclose(rep_n.P_bar, rep_l.Phi_bar, atol=1e-8)
    assert rep_n.innovation.indices == rep_l.innovation.indices
    z_bar, _ = ut_predict_sensed(rep_n.x_bar, rep_n.P_bar, bent.h)
    sel = list(rep_n.innovation.indices)
    residual_n = rep_n.innovation.tau - z_bar[sel]
    residual_l = rep_l.innovation.tau - rep_l.innovation.D @ rep_l.x_bar
    assert np.allclose(residual_n, residual_l, atol=1e-8)


def test_gain_minimizes_trace_under_perturbations():
    rng = np.random.default_rng(6)
    report = random_nonlinear_instance(17)
    objective = trace_objective(report)
    base = objective(report.gain)
    for _ in range(100):
        delta = rng.normal(size=report.gain.shape)
        delta *= 1e-3 / np.linalg.norm(delta)
        assert objective(report.gain + delta) >= base - 1e-12 * (abs(base) + 1)


def test_dominance_on_random_instances():
    for seed in range(10):
        report = random_nonlinear_instance(seed)
        tol = 1e-8 * float(np.trace(report.new_state.Phi_hat))
        assert dominance_oracle(report, delta_samples=200, seed=seed) <= tol


def test_epsilon_scan_confirms_doubling_rule():
    rng = np.random.default_rng(8)
    step = (20.0 / 1.001) ** (1.0 / 199.0)
    for _ in range(5):
        root = rng.normal(size=(3, 3))
        p_zz = root @ root.T + 0.05 * np.eye(3)
        got = parameter_scan_oracle("epsilon", p_zz)
        want = 2.0 * float(np.linalg.eigvalsh(p_zz)[-1])
        assert want / step ** 1.5 <= got <= want * step ** 1.5


def test_posterior_psd_on_random_instances():
    for seed in range(12):
        report = random_nonlinear_instance(seed)
        phi = report.new_state.Phi_hat
        assert np.array_equal(phi, phi.T)
        assert np.linalg.eigvalsh(phi)[0] >= -1e-10 * max(np.trace(phi), 1.0)


def test_scenario_single_step_smoke():
    scenario = nonlinear_scenario()
    traj = simulate(scenario.model, scenario.inputs(1), scenario.x0_true,
                    seed=0, steps=1)
    report = nbklf_step(scenario.initial_state(), scenario.model,
                        scenario.inputs(1)[0], traj.bits[1])
    assert np.all(np.isfinite(report.new_state.x_hat))
    assert np.all(np.isfinite(report.new_state.Phi_hat))
