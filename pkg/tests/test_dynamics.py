"""Propagator exactness, augmented-state invariants, and derived quantities.

The independent oracle for every propagation test is scipy's expm on the
4x4 block generator; sensitivity and QFI are cross-checked against central
finite differences of plain probability evolutions.
"""

import numpy as np
import pytest
from scipy.linalg import expm

import qsense as q
from qsense.dynamics import (SIGMA_X, SIGMA_Y, SIGMA_Z, interval_propagators,
                             propagate_interval)


def augmented_generator(hx, hy, hz):
    H = hx * SIGMA_X + hy * SIGMA_Y + hz * SIGMA_Z
    G = np.zeros((4, 4), dtype=complex)
    G[:2, :2] = H
    G[2:, 2:] = H
    G[2:, :2] = 0.5 * SIGMA_Z
    return G


def random_waveform(rng, n_t=40, tau=None, u_max=0.3):
    vals = rng.uniform(-u_max, u_max, n_t)
    if tau is None:
        tau = rng.uniform(0.5, 25.0)
    return q.ControlWaveform(tau, n_t, vals, u_max)


def test_interval_propagator_matches_expm():
    rng = np.random.default_rng(7)
    model = q.SensorModel()
    worst = 0.0
    for _ in range(50):
        u = rng.uniform(-2.0, 2.0)
        dom = rng.uniform(-0.5, 0.5)
        dt = rng.uniform(1e-4, 3.0)
        wf = q.ControlWaveform(dt, 1, [u], 2.0)
        P = interval_propagators(model, wf, delta_omega=dom)[0]
        G = augmented_generator(u, 0.0, 0.5 * (1.0 + dom))
        ref = expm(-1j * dt * G)
        worst = max(worst, np.max(np.abs(P - ref)))
    assert worst < 1e-12


def test_rwa_propagator_matches_expm():
    rng = np.random.default_rng(8)
    model = q.SensorModel()
    for _ in range(20):
        amp = rng.uniform(0.0, 1.0)
        phase = rng.uniform(-np.pi, np.pi)
        dframe = rng.uniform(-0.5, 0.5)
        dur = rng.uniform(0.1, 4.0)
        dom = rng.uniform(-0.2, 0.2)
        proto = q.RWAProtocol((q.RWASegment(dur, amp, phase, dframe),), 1, 1.0)
        P = interval_propagators(model, proto, delta_omega=dom)[0]
        G = augmented_generator(0.5 * amp * np.cos(phase),
                                0.5 * amp * np.sin(phase),
                                0.5 * (dom - dframe))
        assert np.max(np.abs(P - expm(-1j * dur * G))) < 1e-12


def test_zero_control_zero_field_closed_form():
    # free evolution: psi1(t) = -i (t/2) sigma_z psi0(t) for a sigma_z drift
    model = q.SensorModel()
    tau = 3.7
    wf = q.ControlWaveform(tau, 5, np.zeros(5), 1.0)
    traj = q.evolve(model, wf, delta_omega=0.0)
    fin = traj.final
    phase = np.exp(-0.5j * tau)
    assert abs(fin.psi0[0] - phase) < 1e-14
    assert abs(fin.psi0[1]) < 1e-14
    expected_psi1 = -0.5j * tau * (SIGMA_Z @ fin.psi0)
    assert np.max(np.abs(fin.psi1 - expected_psi1)) < 1e-13


def test_zero_duration_interval_is_identity():
    model = q.SensorModel()
    state = q.AugmentedState(np.array([0.6, 0.8j]), np.array([0.1, -0.2j]))
    out = propagate_interval(state, 0.7, model, 0.0)
    assert np.max(np.abs(out.as_vector() - state.as_vector())) == 0.0


def test_propagate_interval_rejects_nonfinite():
    model = q.SensorModel()
    state = q.AugmentedState(np.array([np.nan, 0.0]), np.zeros(2))
    with pytest.raises(ValueError):
        propagate_interval(state, 0.1, model, 0.1)


def test_norm_preserved_and_real_overlap_zero():
    rng = np.random.default_rng(11)
    model = q.SensorModel()
    for _ in range(10):
        traj = q.evolve(model, random_waveform(rng), delta_omega=0.0)
        for k in (0, traj.states.shape[0] // 2, -1):
            st = q.AugmentedState.from_vector(traj.states[k])
            st.check()  # raises if norm or Re<psi0|psi1> drifts
            assert abs(np.linalg.norm(st.psi0) - 1.0) < 1e-12
            assert abs(np.real(np.vdot(st.psi0, st.psi1))) < 1e-10


def test_probability_in_unit_interval():
    rng = np.random.default_rng(12)
    model = q.SensorModel()
    for _ in range(20):
        wf = random_waveform(rng)
        p = q.outcome_probability(model, wf, delta_omega=rng.uniform(-0.3, 0.3))
        assert 0.0 <= p <= 1.0


def test_sensitivity_matches_finite_difference():
    # 100 random waveforms, batched central difference in the field
    rng = np.random.default_rng(13)
    model = q.SensorModel()
    eps = 1e-6
    n_t = 60
    worst = 0.0
    for _ in range(100):
        wf = random_waveform(rng, n_t=n_t, tau=rng.uniform(2.0, 20.0))
        rows = np.vstack([wf.values, wf.values])
        dom = np.array([[eps], [-eps]])
        fin = q.evolve_batch(model, wf.tau, rows, wf.u_max, delta_omega=dom)
        p = np.abs(fin[:, 0]) ** 2
        fd = (p[0] - p[1]) / (2 * eps)
        worst = max(worst, abs(q.sensitivity(model, wf) - fd))
    assert worst < 1e-5


def test_qfi_bounds_random_controls():
    rng = np.random.default_rng(14)
    model = q.SensorModel()
    for _ in range(20):
        wf = random_waveform(rng)
        f = q.qfi(model, wf)
        assert f >= -1e-12
        assert f <= wf.tau ** 2 + 1e-9 * wf.tau ** 2


def test_equal_superposition_free_evolution_saturates_qfi():
    # (|0>+|1>)/sqrt(2) under pure sigma_z drift reaches QFI = tau^2
    model = q.SensorModel()
    tau = 5.3
    wf = q.ControlWaveform(tau, 4, np.zeros(4), 1.0)
    psi = np.array([1.0, 1.0]) / np.sqrt(2.0)
    traj = q.evolve(model, wf, delta_omega=0.0, initial_psi0=psi)
    assert abs(traj.qfi() - tau ** 2) < 1e-10 * tau ** 2


def test_sensitivity_eta_definition_consistency():
    # eta must equal the derivative of probability for the augmented state
    model = q.SensorModel()
    wf = q.ControlWaveform(6.0, 30, 0.15 * np.ones(30), 0.2)
    traj = q.evolve(model, wf, delta_omega=0.0)
    fin = traj.final
    eta_direct = 2.0 * np.real(np.conj(fin.psi0[0]) * fin.psi1[0])
    assert abs(traj.sensitivity() - eta_direct) == 0.0


def test_refinement_is_exact_noop():
    rng = np.random.default_rng(15)
    model = q.SensorModel()
    wf = random_waveform(rng, n_t=17)
    a = q.evolve(model, wf, delta_omega=0.1).states[-1]
    b = q.evolve(model, wf.refine(3), delta_omega=0.1).states[-1]
    assert np.max(np.abs(a - b)) < 1e-12


def test_final_state_matches_evolve():
    rng = np.random.default_rng(16)
    model = q.SensorModel()
    for _ in range(5):
        wf = random_waveform(rng, n_t=int(rng.integers(3, 200)))
        a = q.evolve(model, wf, delta_omega=0.0).states[-1]
        b = q.final_state(model, wf, delta_omega=0.0).as_vector()
        assert np.max(np.abs(a - b)) < 5e-13


def test_evolve_batch_matches_evolve():
    rng = np.random.default_rng(17)
    model = q.SensorModel()
    tau, n_t, u_max = 8.0, 25, 0.4
    rows = rng.uniform(-u_max, u_max, (6, n_t))
    fin = q.evolve_batch(model, tau, rows, u_max, delta_omega=0.05)
    for i in range(6):
        wf = q.ControlWaveform(tau, n_t, rows[i], u_max)
        ref = q.evolve(model, wf, delta_omega=0.05).states[-1]
        assert np.max(np.abs(fin[i] - ref)) < 1e-12


def test_time_varying_field_array():
    # per-interval field array must match a manually chained evolution
    model = q.SensorModel()
    n_t = 12
    wf = q.ControlWaveform(4.0, n_t, 0.2 * np.ones(n_t), 0.3)
    dom = np.linspace(-0.05, 0.05, n_t)
    traj = q.evolve(model, wf, delta_omega=dom)
    state = q.AugmentedState(np.array([1.0, 0.0]), np.zeros(2))
    for k in range(n_t):
        state = propagate_interval(state, 0.2, model, wf.dt, delta_omega=dom[k])
    assert np.max(np.abs(traj.states[-1] - state.as_vector())) < 1e-12


def test_rwa_resonant_flip_probability():
    # resonant half and full flips of a single rotating-frame segment
    u = 0.25
    for frac, want in [(0.5, 0.5), (1.0, 0.0)]:
        dur = frac * np.pi / u
        proto = q.RWAProtocol((q.RWASegment(dur, u, 0.0),), 1, u)
        traj = q.evolve(q.SensorModel(), proto, delta_omega=0.0)
        assert abs(traj.probability() - want) < 1e-12
    # at the full flip the readout amplitude vanishes, so eta does too
    proto = q.RWAProtocol((q.RWASegment(np.pi / u, u, 0.0),), 1, u)
    assert abs(q.evolve(q.SensorModel(), proto, 0.0).sensitivity()) < 1e-12


def test_rwa_eigenstate_symmetry():
    # |<0|U|0>|^2 = |<1|U|1>|^2 for any 2x2 unitary
    rng = np.random.default_rng(18)
    segs = tuple(q.RWASegment(0.8, rng.uniform(0, 0.5),
                              rng.uniform(-np.pi, np.pi),
                              rng.uniform(-0.2, 0.2)) for _ in range(3))
    proto = q.RWAProtocol(segs, 3, 1.0)
    model = q.SensorModel()
    p00 = q.evolve(model, proto, 0.0).probability()
    t11 = q.evolve(model, proto, 0.0, initial_psi0=np.array([0.0, 1.0]))
    p11 = float(np.abs(t11.states[-1, 1]) ** 2)
    assert abs(p00 - p11) < 1e-10


def test_bloch_vector_cardinal_states():
    s2 = 1.0 / np.sqrt(2.0)
    cases = [
        (np.array([1.0, 0.0]), (0.0, 0.0, 1.0)),
        (np.array([0.0, 1.0]), (0.0, 0.0, -1.0)),
        (np.array([s2, s2]), (1.0, 0.0, 0.0)),
        (np.array([s2, 1j * s2]), (0.0, 1.0, 0.0)),
    ]
    for psi, want in cases:
        assert np.max(np.abs(q.bloch_vector(psi) - np.array(want))) < 1e-14


def test_bloch_vector_rejects_unnormalized():
    with pytest.raises(ValueError):
        q.bloch_vector(np.array([1.0, 1.0]))


def test_waveform_validation():
    with pytest.raises(ValueError):
        q.ControlWaveform(1.0, 3, [0.1, 0.2, 0.5], 0.3)  # exceeds bound
    with pytest.raises(ValueError):
        q.ControlWaveform(-1.0, 3, [0.0, 0.0, 0.0], 0.3)
    with pytest.raises(ValueError):
        q.ControlWaveform(1.0, 4, [0.0, 0.0, 0.0], 0.3)  # shape mismatch


def test_rwa_protocol_grid_alignment_enforced():
    segs = (q.RWASegment(1.0, 0.1, 0.0), q.RWASegment(0.618, 0.1, 0.5))
    with pytest.raises(ValueError):
        q.RWAProtocol(segs, 10, 0.2)  # boundary off the uniform grid


def test_isolated_model_validation():
    with pytest.raises(ValueError):
        q.SensorModel(omega0=-1.0)
    with pytest.raises(ValueError):
        q.SensorModel(omega0=np.inf)
