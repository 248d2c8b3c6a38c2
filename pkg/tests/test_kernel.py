"""Impulse-response kernel construction and its closed-form YX reference."""

import numpy as np
import pytest

import qsense as q
from qsense.dynamics import evolve, outcome_probability, sensitivity
from qsense.kernel import IMPULSE_AREA_MAX, KernelSamples

MODEL = q.SensorModel()


def _yx_rwa(u_max, tau, n_t):
    return q.yx_rwa_protocol(q.YXParams(u_max, tau), n_t=n_t)


def test_numerical_matches_analytic_yx_rwa():
    # closed form evaluated at the impulse locations (the numerical centers
    # sit at fine-interval midpoints, half a fine step off the uniform grid)
    u_max, tau = 0.5, 0.5 * np.pi / 0.5
    num = q.numerical_kernel(MODEL, _yx_rwa(u_max, tau, 400), n_centers=100)
    expect = (0.5 * np.sin(0.5 * u_max * tau)
              * np.sin(u_max * (0.5 * tau - np.abs(num.centers))))
    scale = np.max(np.abs(expect))
    assert np.max(np.abs(num.values - expect)) < 1e-2 * scale
    ana = q.analytic_kernel_yx_rwa(u_max, tau, n_centers=100)
    assert abs(num.integral - ana.integral) < 1e-2 * abs(ana.integral)


def test_analytic_integral_equals_rwa_sensitivity():
    u_max = 0.5
    for rel in (0.3, 0.5, 0.9):
        tau = rel * np.pi / u_max
        ker = q.analytic_kernel_yx_rwa(u_max, tau, n_centers=200)
        eta = q.eta_yx_rwa(u_max, tau)
        assert abs(ker.integral - eta) < 5e-4 * abs(eta)


def test_integral_reproduces_lab_sensitivity():
    # integral of the impulse response = response to a uniform unit field
    u_max = 0.5
    tau = 0.5 * np.pi / u_max
    yx = q.yx_waveform(q.YXParams(u_max, tau), 1000)
    det = q.detune_waveform(
        q.DetuneParams(u_max, tau, 1.0 + q.optimize_detune_rwa(u_max, tau),
                       0.0), 1000)
    for wf in (yx, det):
        ker = q.numerical_kernel(MODEL, wf, n_centers=200)
        eta = sensitivity(MODEL, wf)
        assert abs(ker.integral - eta) < 1e-2 * abs(eta)


def test_integral_reproduces_rwa_sensitivity():
    u_max = 0.4
    tau = 0.6 * np.pi / u_max
    params = q.DetuneParams(u_max, tau,
                            1.0 + q.optimize_detune_rwa(u_max, tau), 0.25)
    proto = q.detune_rwa_protocol(params, n_t=600)
    ker = q.numerical_kernel(MODEL, proto, n_centers=200)
    eta = q.eta_detune_rwa(u_max, tau, params.delta_omega_detune)
    assert abs(ker.integral - eta) < 1e-2 * abs(eta)


def test_zero_control_zero_kernel():
    wf = q.ControlWaveform(2.0, 200, np.zeros(200), 0.5)
    ker = q.numerical_kernel(MODEL, wf, n_centers=100)
    # roundoff of unit-magnitude amplitudes divided by twice the area
    assert np.max(np.abs(ker.values)) < 1e-10


def test_uniform_field_prediction_matches_simulation():
    u_max = 0.5
    tau = 0.5 * np.pi / u_max
    wf = q.yx_waveform(q.YXParams(u_max, tau), 1000)
    ker = q.numerical_kernel(MODEL, wf, n_centers=200)
    c = 1e-4
    dp = (outcome_probability(MODEL, wf, delta_omega=c)
          - outcome_probability(MODEL, wf, delta_omega=0.0))
    pred = q.convolve_predict(ker, np.full(200, c))
    assert abs(pred - dp) < 1e-2 * abs(dp)


def test_slow_field_prediction_matches_simulation():
    u_max = 0.5
    tau = 0.5 * np.pi / u_max
    n_t, n_centers = 1000, 200
    wf = q.yx_waveform(q.YXParams(u_max, tau), n_t)

    def field(t_prime):
        return 1e-3 * np.cos(2.0 * np.pi * t_prime / (3.0 * tau))

    ker = q.numerical_kernel(MODEL, wf, n_centers=n_centers)
    pred = q.convolve_predict(ker, field(ker.centers))
    t_mid = wf.midpoints - 0.5 * tau
    p1 = evolve(MODEL, wf, delta_omega=field(t_mid)).probability()
    p0 = outcome_probability(MODEL, wf, delta_omega=0.0)
    assert abs(pred - (p1 - p0)) < 3e-2 * abs(p1 - p0)


def test_impulse_area_linearity():
    u_max = 0.5
    tau = 0.5 * np.pi / u_max
    wf = q.yx_waveform(q.YXParams(u_max, tau), 600)
    k1 = q.numerical_kernel(MODEL, wf, n_centers=100, impulse_area=1e-3)
    k2 = q.numerical_kernel(MODEL, wf, n_centers=100, impulse_area=1e-2)
    assert np.max(np.abs(k1.values - k2.values)) < 1e-3 * np.max(np.abs(k1.values))


def test_numerical_kernel_validation():
    wf = q.ControlWaveform(1.0, 200, np.zeros(200), 0.5)
    with pytest.raises(ValueError):
        q.numerical_kernel(MODEL, wf, n_centers=49)
    with pytest.raises(ValueError):
        q.numerical_kernel(MODEL, wf, n_centers=100, impulse_area=0.0)
    with pytest.raises(ValueError):
        q.numerical_kernel(MODEL, wf, n_centers=100,
                           impulse_area=2 * IMPULSE_AREA_MAX)
    with pytest.raises(ValueError):
        q.numerical_kernel(MODEL, wf, n_centers=150)  # 200 % 150 != 0


def test_kernel_samples_validation():
    wf = q.ControlWaveform(1.0, 100, np.zeros(100), 0.5)
    good_c = np.linspace(-0.45, 0.45, 10)
    q.KernelSamples(good_c, np.zeros(10), wf)
    with pytest.raises(ValueError):
        KernelSamples(good_c, np.zeros(9), wf)
    with pytest.raises(ValueError):
        KernelSamples(good_c[::-1], np.zeros(10), wf)
    with pytest.raises(ValueError):
        KernelSamples(good_c + 0.3, np.zeros(10), wf)  # outside window
    with pytest.raises(ValueError):
        KernelSamples(np.array([0.0]), np.array([0.0]), wf)
    nonuniform = np.array([-0.4, -0.1, 0.0, 0.4])
    with pytest.raises(ValueError):
        KernelSamples(nonuniform, np.zeros(4), wf)


def test_convolve_predict_grid_check():
    u_max = 0.5
    ker = q.analytic_kernel_yx_rwa(u_max, np.pi, n_centers=100)
    with pytest.raises(ValueError):
        q.convolve_predict(ker, np.zeros(99))
    assert q.convolve_predict(ker, np.ones(100)) == pytest.approx(ker.integral)
