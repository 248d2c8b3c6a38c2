"""Adjoint gradients, arc analysis, and the free-form/parametric optimizers."""

import numpy as np
import pytest

import qsense as q
from qsense.dynamics import evolve, evolve_batch, sensitivity
from qsense.optimal_control import (adjoint_diagnostics, adjoint_trajectory,
                                    classify_arcs, parametric_cost_and_grad,
                                    smoothness_cost_and_gradient)

MODEL = q.SensorModel()
U_MAX = 0.2


def _eta_of(fin):
    return 2.0 * np.real(np.conj(fin[..., 0]) * fin[..., 2])


def _qfi_of(fin):
    p0, p1 = fin[..., :2], fin[..., 2:]
    ov = np.sum(np.conj(p0) * p1, axis=-1)
    return 4.0 * (np.sum(np.abs(p1) ** 2, axis=-1) - np.abs(ov) ** 2)


def _terminal(fin, kind):
    return -_eta_of(fin) ** 2 if kind == "EtaSquared" else -_qfi_of(fin)


@pytest.mark.parametrize("kind", ["EtaSquared", "NegQFI"])
def test_gradient_matches_finite_differences(kind):
    # phi*dt is the exact discrete gradient of the terminal cost
    rng = np.random.default_rng(7)
    tau = 0.6 * np.pi / U_MAX
    n_t = 60
    eps = 1e-6
    for _ in range(8):
        u = rng.uniform(-U_MAX, U_MAX, n_t)
        wf = q.ControlWaveform(tau, n_t, u, U_MAX)
        grad = adjoint_diagnostics(MODEL, wf, q.CostKind(kind)).grad
        rows = np.repeat(u[None, :], 2 * n_t, axis=0)
        idx = np.arange(n_t)
        rows[2 * idx, idx] += eps
        rows[2 * idx + 1, idx] -= eps
        c = _terminal(evolve_batch(MODEL, tau, rows, U_MAX), kind)
        fd = (c[0::2] - c[1::2]) / (2.0 * eps)
        assert np.linalg.norm(grad - fd) / np.linalg.norm(fd) < 1e-4


def test_adjoint_pairing_conserved():
    # the discrete costate chain preserves <A_k|S_k> exactly
    rng = np.random.default_rng(3)
    tau = 0.8 * np.pi / U_MAX
    wf = q.ControlWaveform(tau, 90, rng.uniform(-U_MAX, U_MAX, 90), U_MAX)
    traj = evolve(MODEL, wf, delta_omega=0.0)
    for kind in ("EtaSquared", "NegQFI"):
        A = adjoint_trajectory(traj, q.CostKind(kind)).states
        pair = np.sum(np.conj(A) * traj.states, axis=1)
        assert np.max(np.abs(pair - pair[-1])) < 1e-12 * max(abs(pair[-1]), 1.0)


def test_adjoint_terminal_boundary():
    rng = np.random.default_rng(11)
    tau = 0.5 * np.pi / U_MAX
    wf = q.ControlWaveform(tau, 70, rng.uniform(-U_MAX, U_MAX, 70), U_MAX)
    traj = evolve(MODEL, wf, delta_omega=0.0)
    fin = traj.states[-1]
    p0, p1 = fin[:2], fin[2:]

    A = adjoint_trajectory(traj, q.CostKind("EtaSquared")).states[-1]
    eta = _eta_of(fin)
    expect = np.zeros(4, dtype=complex)
    expect[0] = -4.0 * eta * p1[0]
    expect[2] = -4.0 * eta * p0[0]
    assert np.max(np.abs(A - expect)) < 1e-12

    A = adjoint_trajectory(traj, q.CostKind("NegQFI")).states[-1]
    expect = np.concatenate([8.0 * p1 * np.vdot(p1, p0),
                             8.0 * (-p1 + p0 * np.vdot(p0, p1))])
    assert np.max(np.abs(A - expect)) < 1e-12


def test_adjoint_requires_lab_frame():
    seg = q.RWASegment(duration=1.0, amplitude=0.1, phase=0.0)
    proto = q.RWAProtocol((seg,), n_t=64, u_max=U_MAX)
    traj = evolve(MODEL, proto)
    with pytest.raises(ValueError):
        adjoint_trajectory(traj, q.CostKind("EtaSquared"))


def test_smoothness_cost_and_gradient():
    rng = np.random.default_rng(5)
    u = rng.uniform(-1.0, 1.0, 40)
    dt = 0.05
    c, g = smoothness_cost_and_gradient(u, dt)
    d = np.diff(u)
    assert abs(c - 0.5 * np.dot(d, d) / dt) < 1e-14
    eps = 1e-4
    for k in (0, 17, 39):
        up, um = u.copy(), u.copy()
        up[k] += eps
        um[k] -= eps
        fd = (smoothness_cost_and_gradient(up, dt)[0]
              - smoothness_cost_and_gradient(um, dt)[0]) / (2.0 * eps)
        assert abs(g[k] - fd) < 1e-6 * max(1.0, abs(g[k]))
    assert smoothness_cost_and_gradient(np.full(10, 0.3), dt)[0] == 0.0


def test_smooth_weight_enters_cost_affinely():
    rng = np.random.default_rng(9)
    tau = 0.4 * np.pi / U_MAX
    u = rng.uniform(-U_MAX, U_MAX, 80)
    wf = q.ControlWaveform(tau, 80, u, U_MAX)
    cs, gs = smoothness_cost_and_gradient(u, wf.dt)
    c0 = adjoint_diagnostics(MODEL, wf, q.CostKind("EtaSquared")).cost_value
    for w in (0.5, 2.0):
        d = adjoint_diagnostics(MODEL, wf, q.CostKind("EtaSquared", w))
        assert abs(d.cost_value - (c0 + w * cs)) < 1e-12 * max(1.0, abs(c0))
        base = adjoint_diagnostics(MODEL, wf, q.CostKind("EtaSquared")).grad
        assert np.max(np.abs(d.grad - (base + w * gs))) < 1e-12


def test_classify_arcs_synthetic():
    u_max = 1.0
    u = np.array([1.0, 1.0, -1.0, -1.0, 0.2, 0.3, 0.25, -1.0, 1.0])
    phi = np.array([-1.0, -1.0, 1.0, 1.0, 1e-5, 1e-5, 1e-5, 1.0, -1.0])
    arcs = classify_arcs(u, phi, u_max)
    assert arcs == (("Bang+", 0, 2), ("Bang-", 2, 4), ("Singular", 4, 7),
                    ("Bang-", 7, 8), ("Bang+", 8, 9))
    # interior runs shorter than three samples are switch crossings
    u2 = np.array([1.0, 0.1, 0.1, -1.0])
    phi2 = np.array([-1.0, 1e-5, 1e-5, 1.0])
    assert all(lab != "Singular" for lab, _, _ in classify_arcs(u2, phi2, u_max))
    # interior sample with large phi is never singular
    u3 = np.array([1.0, 0.0, -1.0, -1.0])
    phi3 = np.array([-1.0, 0.5, 1.0, 1.0])
    assert all(lab != "Singular" for lab, _, _ in classify_arcs(u3, phi3, u_max))


def test_cost_kind_and_config_validation():
    with pytest.raises(ValueError):
        q.CostKind("EtaCubed")
    with pytest.raises(ValueError):
        q.CostKind("EtaSquared", smooth_weight=-1.0)
    good = dict(u_max=U_MAX, tau=1.0, n_t=200, cost=q.CostKind("EtaSquared"))
    q.OptimizationConfig(**good)
    with pytest.raises(ValueError):
        q.OptimizationConfig(**{**good, "n_t": 50})
    with pytest.raises(ValueError):
        q.OptimizationConfig(**{**good, "coarse_n_t": 77})
    with pytest.raises(ValueError):
        q.OptimizationConfig(**{**good, "tau": -1.0})


def test_free_form_monotone_history():
    tau = 0.6 * np.pi / U_MAX
    cfg = q.OptimizationConfig(u_max=U_MAX, tau=tau, n_t=120,
                               cost=q.CostKind("EtaSquared"), max_iters=150)
    res = q.optimize_free_form(MODEL, cfg)
    assert np.all(np.diff(res.history) <= 1e-12)
    assert abs(res.cost_value - res.history[-1]) < 1e-11 * abs(res.cost_value)
    assert res.init_name == "bang+"
    assert np.all(np.abs(res.waveform.values) <= U_MAX + 1e-12)
    assert res.converged == (res.kkt_residual < cfg.kkt_tol)


def test_free_form_rejects_bad_start_length():
    cfg = q.OptimizationConfig(u_max=U_MAX, tau=1.0, n_t=120,
                               cost=q.CostKind("EtaSquared"), max_iters=5)
    with pytest.raises(ValueError):
        q.optimize_free_form(MODEL, cfg, np.zeros(60))


def test_multistart_beats_each_start_and_refines():
    tau = 0.5 * np.pi / U_MAX
    cfg = q.OptimizationConfig(u_max=U_MAX, tau=tau, n_t=100,
                               cost=q.CostKind("EtaSquared"), max_iters=80,
                               n_random_starts=1)
    extra = {"zero-ish": np.full(100, 0.01)}
    best = q.optimize_multistart(MODEL, cfg, extra_inits=extra)
    single = q.optimize_free_form(MODEL, cfg, extra["zero-ish"].copy())
    assert best.cost_value <= single.cost_value + 1e-15

    cfg2 = q.OptimizationConfig(u_max=U_MAX, tau=tau, n_t=200,
                                cost=q.CostKind("EtaSquared"), max_iters=60,
                                coarse_n_t=100)
    res = q.optimize_multistart(MODEL, cfg2)
    assert res.init_name.endswith("+refined")
    assert res.waveform.n_t == 200


def test_bang_optimum_passes_verification():
    # short interrogation: converged optimum is pure bang-bang and satisfies
    # the first-order structure checks
    tau = 0.6 * np.pi / U_MAX
    cfg = q.OptimizationConfig(u_max=U_MAX, tau=tau, n_t=400,
                               cost=q.CostKind("EtaSquared"), max_iters=1200,
                               coarse_n_t=100, seed=0, n_random_starts=1)
    res = q.optimize_multistart(MODEL, cfg)
    report = q.verify_optimality(MODEL, res.waveform, cfg.cost)
    assert report.passed
    assert report.bang_consistency == 1.0
    assert report.hoc_constancy < 1e-2
    assert report.hoc_mean < 0.0
    assert all(lab != "Singular" for lab, _, _ in report.arc_labels)
    # saturation: nearly every sample pinned at a bound
    frac = np.mean(np.abs(res.waveform.values) > U_MAX * (1 - 1e-6))
    assert frac > 0.95


def test_singular_arc_carries_second_order_value():
    # past the critical time the optimum grows a singular plateau whose
    # control matches the second-order formula, with phi collapsed on it
    u_max = 0.1
    tau = 1.2 * np.pi / u_max
    cfg = q.OptimizationConfig(u_max=u_max, tau=tau, n_t=300,
                               cost=q.CostKind("EtaSquared"), max_iters=900,
                               seed=0, n_random_starts=1)
    res = q.optimize_multistart(MODEL, cfg)
    sing = [(a, b) for lab, a, b in res.arc_labels if lab == "Singular"]
    assert len(sing) == 1
    a, b = sing[0]
    assert b - a > 30
    diag = res.diagnostics
    err = np.abs(res.waveform.values[a:b] - diag.u_sing[a:b])
    assert np.median(err) < 1e-2 * u_max
    assert np.max(np.abs(diag.phi[a:b])) < 1e-3 * np.max(np.abs(diag.phi))


def test_verify_optimality_rejects_references():
    tau = 0.6 * np.pi / U_MAX
    yx = q.yx_waveform(q.YXParams(U_MAX, tau), 600)
    assert not q.verify_optimality(MODEL, yx, q.CostKind("EtaSquared")).passed
    rng = np.random.default_rng(1)
    wf = q.ControlWaveform(tau, 600, rng.uniform(-U_MAX, U_MAX, 600), U_MAX)
    assert not q.verify_optimality(MODEL, wf, q.CostKind("EtaSquared")).passed


def test_indicator_family_matches_raw_gradient():
    rng = np.random.default_rng(13)
    tau = 0.5 * np.pi / U_MAX
    base = rng.uniform(-U_MAX, U_MAX, 64)
    wf = q.ControlWaveform(tau, 64, base, U_MAX)
    diag = adjoint_diagnostics(MODEL, wf, q.CostKind("EtaSquared"))
    c, g = parametric_cost_and_grad(MODEL, q.IndicatorFamily(base),
                                    np.zeros(64), tau, 64, U_MAX,
                                    q.CostKind("EtaSquared"))
    assert c == diag.cost_value
    assert np.max(np.abs(g - diag.grad)) < 1e-15


class _ScaleFamily:
    """Single overall-amplitude parameter on a fixed shape."""

    def __init__(self, shape):
        self.shape = np.asarray(shape, dtype=float)

    def values(self, theta, t_mid):
        return theta[0] * self.shape

    def jacobian(self, theta, t_mid):
        return self.shape[None, :]


def test_optimize_parametric_respects_bounds():
    tau = 0.5 * np.pi / U_MAX
    shape = q.yx_waveform(q.YXParams(U_MAX, tau), 200).values / U_MAX
    fam = _ScaleFamily(shape)
    c0, _ = parametric_cost_and_grad(MODEL, fam, np.array([0.05]), tau, 200,
                                     U_MAX, q.CostKind("EtaSquared"))
    fit = q.optimize_parametric(MODEL, fam, np.array([0.05]), tau, 200, U_MAX,
                                q.CostKind("EtaSquared"),
                                bounds=[(0.0, U_MAX)])
    assert fit.cost <= c0
    assert 0.0 <= fit.theta[0] <= U_MAX
    # stronger drive helps below the speed limit: bound is active
    assert fit.theta[0] > 0.9 * U_MAX
    assert abs(fit.eta - sensitivity(MODEL, fit.waveform)) < 1e-12


def test_estimate_cost_deviation_first_order():
    rng = np.random.default_rng(17)
    tau = 0.6 * np.pi / U_MAX
    base_u = rng.uniform(-0.6 * U_MAX, 0.6 * U_MAX, 150)
    base = q.ControlWaveform(tau, 150, base_u, U_MAX)
    du = 1e-4 * U_MAX * rng.standard_normal(150)
    new = q.ControlWaveform(tau, 150, base_u + du, U_MAX)
    for kind in ("EtaSquared", "NegQFI"):
        cost = q.CostKind(kind)
        est = q.estimate_cost_deviation(MODEL, base, new, cost)
        fin = evolve_batch(MODEL, tau, np.vstack([new.values, base.values]),
                           U_MAX)
        c = _terminal(fin, kind)
        actual = c[0] - c[1]
        assert abs(est.delta_cost - actual) < 1e-2 * abs(actual)
    est = q.estimate_cost_deviation(MODEL, base, new, q.CostKind("EtaSquared"))
    eta_new = sensitivity(MODEL, new)
    eta_base = sensitivity(MODEL, base)
    actual_deta = abs(eta_new) - abs(eta_base)
    assert abs(est.delta_eta - actual_deta) < 1e-2 * abs(actual_deta)
    est_q = q.estimate_cost_deviation(MODEL, base, new, q.CostKind("NegQFI"))
    assert np.isnan(est_q.delta_eta)


def test_estimate_cost_deviation_grid_mismatch():
    base = q.ControlWaveform(1.0, 100, np.zeros(100), U_MAX)
    with pytest.raises(ValueError):
        q.estimate_cost_deviation(MODEL, base,
                                  q.ControlWaveform(1.0, 120, np.zeros(120),
                                                    U_MAX),
                                  q.CostKind("EtaSquared"))
    with pytest.raises(ValueError):
        q.estimate_cost_deviation(MODEL, base,
                                  q.ControlWaveform(1.1, 100, np.zeros(100),
                                                    U_MAX),
                                  q.CostKind("EtaSquared"))


def test_negqfi_descent_improves_qfi():
    tau = 0.5 * np.pi / U_MAX
    n_t = 120
    cfg = q.OptimizationConfig(u_max=U_MAX, tau=tau, n_t=n_t,
                               cost=q.CostKind("NegQFI"), max_iters=200)
    res = q.optimize_free_form(MODEL, cfg)
    qfi_init = evolve(MODEL, q.ControlWaveform(tau, n_t, np.full(n_t, U_MAX),
                                               U_MAX)).qfi()
    qfi_opt = -res.cost_value
    assert qfi_opt >= qfi_init - 1e-12
    assert qfi_opt <= tau ** 2 + 1e-9
