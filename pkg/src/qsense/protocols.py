"""Closed-form reference protocols and their rotating-frame analytics.

Two references are provided. The resonant two-axis sequence ("YX") drives at
the carrier frequency with a quarter-turn phase jump halfway through, padding
with free evolution once the window exceeds the flip time t_QSL = pi/u_max.
The "detune" protocol is a single smooth sinusoid at a frequency offset
delta_omega_detune = omega - omega0 from the carrier, tuned so the
rotating-frame precession maximizes the sensitivity.

Closed-form rotating-frame sensitivities are exact for the corresponding
RWAProtocol objects; the lab-frame waveforms sample the carrier at interval
midpoints and differ by counter-rotating corrections.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .dynamics import ControlWaveform, RWAProtocol, RWASegment, SensorModel

D0_DETUNE = 2.606  # small-amplitude limit of the optimal x = omega_bar * tau

_CARRIER_SAMPLES_MIN = 20  # midpoint sampling must resolve the carrier


@dataclass(frozen=True)
class YXParams:
    """Resonant two-axis reference protocol parameters."""

    u_max: float
    tau: float
    omega0: float = 1.0

    def __post_init__(self):
        if not (self.u_max > 0 and self.tau > 0):
            raise ValueError("u_max and tau must be positive")

    @property
    def t_qsl(self) -> float:
        return np.pi / self.u_max


@dataclass(frozen=True)
class DetuneParams:
    """Single-sinusoid protocol: u(t) = u_max sin(omega (t - tau/2) + a pi)."""

    u_max: float
    tau: float
    omega: float
    a: float
    omega0: float = 1.0

    def __post_init__(self):
        if not (self.u_max > 0 and self.tau > 0):
            raise ValueError("u_max and tau must be positive")
        if not self.omega > 0:
            raise ValueError("omega must be positive")

    @property
    def t_qsl(self) -> float:
        return np.pi / self.u_max

    @property
    def delta_omega_detune(self) -> float:
        return self.omega - self.omega0

    @property
    def omega_bar(self) -> float:
        return float(np.hypot(self.u_max, self.delta_omega_detune))

    @property
    def x(self) -> float:
        return self.omega_bar * self.tau


def _check_carrier_resolved(omega: float, tau: float, n_t: int):
    dt = tau / n_t
    if dt >= (2.0 * np.pi / omega) / _CARRIER_SAMPLES_MIN:
        raise ValueError(
            "n_t=%d leaves the carrier unresolved; need dt < 2*pi/(%d*omega)"
            % (n_t, _CARRIER_SAMPLES_MIN))


def _yx_segment_times(u_max: float, tau: float) -> tuple:
    t_qsl = np.pi / u_max
    t1 = min(0.5 * tau, 0.5 * t_qsl)
    t2 = max(0.5 * tau, tau - 0.5 * t_qsl)
    return t1, t2


def yx_waveform(params: YXParams, n_t: int) -> ControlWaveform:
    """Lab-frame YX sequence sampled at interval midpoints.

    First segment drives along the rotating-frame y axis (carrier phase
    pi/2), the last along x (phase 0); between them the control is off. The
    segments each last min(tau/2, t_QSL/2).
    """
    _check_carrier_resolved(params.omega0, params.tau, n_t)
    t1, t2 = _yx_segment_times(params.u_max, params.tau)
    tm = (np.arange(n_t) + 0.5) * (params.tau / n_t)
    u = np.where(
        tm < t1, params.u_max * np.cos(params.omega0 * tm + 0.5 * np.pi),
        np.where(tm < t2, 0.0, params.u_max * np.cos(params.omega0 * tm)))
    return ControlWaveform(params.tau, n_t, u, params.u_max)


def _aligned_n_t(tau: float, boundaries, n_min: int) -> int:
    """Smallest n_t >= n_min whose uniform grid passes through `boundaries`."""
    for n in range(n_min, 65536):
        dt = tau / n
        if all(abs(b / dt - round(b / dt)) < 1e-9 for b in boundaries):
            return n
    raise ValueError("no grid up to 65536 intervals aligns with the segment "
                     "boundaries; pass n_t explicitly")


def yx_rwa_protocol(params: YXParams, n_t: int = None) -> RWAProtocol:
    """Rotating-frame YX sequence: y-axis drive, optional gap, x-axis drive."""
    t1, t2 = _yx_segment_times(params.u_max, params.tau)
    segments = [RWASegment(t1, params.u_max, 0.5 * np.pi)]
    if t2 > t1:
        segments.append(RWASegment(t2 - t1, 0.0, 0.0))
    segments.append(RWASegment(params.tau - t2, params.u_max, 0.0))
    if n_t is None:
        n_t = _aligned_n_t(params.tau, [t1, t2], 64)
    return RWAProtocol(tuple(segments), n_t, params.u_max)


def detune_waveform(params: DetuneParams, n_t: int) -> ControlWaveform:
    """Lab-frame detune sinusoid sampled at interval midpoints."""
    _check_carrier_resolved(params.omega, params.tau, n_t)
    tm = (np.arange(n_t) + 0.5) * (params.tau / n_t)
    u = params.u_max * np.sin(params.omega * (tm - 0.5 * params.tau)
                              + params.a * np.pi)
    return ControlWaveform(params.tau, n_t, u, params.u_max)


def detune_rwa_protocol(params: DetuneParams, n_t: int = 1) -> RWAProtocol:
    """Rotating-frame detune drive: one constant segment at the drive frame.

    The lab sinusoid u_max sin(omega (t - tau/2) + a pi) carries phase
    a pi - omega tau/2 - pi/2 relative to cos(omega t), which becomes the
    transverse-axis angle in the frame rotating at omega.
    """
    phase = params.a * np.pi - 0.5 * params.omega * params.tau - 0.5 * np.pi
    seg = RWASegment(params.tau, params.u_max, phase,
                     frame_detune=params.delta_omega_detune)
    return RWAProtocol((seg,), n_t, params.u_max)


# ---------------------------------------------------------------------------
# closed-form rotating-frame sensitivities


def eta_yx_rwa(u_max: float, tau: float):
    """Rotating-frame sensitivity of the YX sequence, both duration branches.

    Continuous at tau = t_QSL; grows linearly once the free-evolution gap
    opens, with eta/tau -> 1/2 as tau -> infinity.
    """
    u_max = np.asarray(u_max, dtype=float)
    tau = np.asarray(tau, dtype=float)
    t_qsl = np.pi / u_max
    r = tau / t_qsl
    short = (t_qsl / np.pi) * np.sin(0.5 * np.pi * r) * (1.0 - np.cos(0.5 * np.pi * r))
    long = 0.5 * t_qsl * (r - 1.0 + 2.0 / np.pi)
    out = np.where(r <= 1.0, short, long)
    return float(out) if out.ndim == 0 else out


def eta_detune_rwa(u_max: float, tau: float, delta_omega_detune):
    """Rotating-frame sensitivity of the detune drive at frame offset dw.

    Odd in the detune sign; the magnitude is tau (u tau)^2
    sqrt(x^2 - (u tau)^2) F(x) with x = omega_bar tau.
    """
    dw = np.asarray(delta_omega_detune, dtype=float)
    ob = np.hypot(u_max, dw)
    x = ob * tau
    out = dw * (u_max ** 2 / ob ** 4) * (0.5 * x * np.sin(x) + np.cos(x) - 1.0)
    return float(out) if out.ndim == 0 else out


def detune_shape_factor(x):
    """F(x) = (1 - (x/2) sin x - cos x) / x^4, series-switched near 0.

    Positive on (0, 2 pi), F(0) = 1/24, F(2 pi) = 0.
    """
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < 0.3
    xs = np.where(small, 1.0, x)
    direct = (1.0 - 0.5 * xs * np.sin(xs) - np.cos(xs)) / xs ** 4
    x2 = x * x
    series = (1.0 / 24.0 - x2 / 360.0 + x2 * x2 / 13440.0
              - x2 * x2 * x2 / 907200.0)
    out = np.where(small, series, direct)
    return float(out) if out.ndim == 0 else out


def approx_detune(u_max: float, tau: float) -> float:
    """Approximate optimal frame offset D0/tau - 0.02 u_max^2 tau.

    Fitted for windows up to t_QSL; outside that range a warning is issued
    and the formula is extrapolated.
    """
    if not (u_max > 0 and tau > 0):
        raise ValueError("u_max and tau must be positive")
    if tau > np.pi / u_max:
        warnings.warn("approx_detune extrapolated beyond tau = t_QSL",
                      stacklevel=2)
    return D0_DETUNE / tau - 0.02 * u_max ** 2 * tau


def optimize_detune_rwa(u_max: float, tau: float) -> float:
    """Frame offset maximizing the rotating-frame sensitivity magnitude.

    Works in the x = omega_bar tau variable, where |eta| is proportional to
    sqrt(x^2 - (u_max tau)^2) F(x) and the maximizer lies strictly inside
    (u_max tau, 2 pi). Bracket resolved to 1e-10 in x.
    """
    if not (u_max > 0 and tau > 0):
        raise ValueError("u_max and tau must be positive")
    b = u_max * tau
    hi = 2.0 * np.pi
    if b >= hi:
        raise ValueError("no interior maximum: u_max*tau >= 2*pi")

    def neg_gain(x):
        return -np.sqrt(max(x * x - b * b, 0.0)) * detune_shape_factor(x)

    res = minimize_scalar(neg_gain, bounds=(b, hi), method="bounded",
                          options={"xatol": 1e-10})
    x_opt = float(res.x)
    margin = 1e-6 * (hi - b)
    if not (b + margin < x_opt < hi - margin):
        raise ValueError("no interior maximum found in (u_max*tau, 2*pi)")
    return float(np.sqrt((x_opt / tau) ** 2 - u_max ** 2))


@dataclass(frozen=True)
class DetuneFullResult:
    """Best detune parameters under full lab-frame dynamics."""

    params: DetuneParams
    eta: float
    converged: bool
    grad_ratio: float  # final/initial parametric gradient norm


def _detune_n_t(omega: float, tau: float) -> int:
    n = max(200, int(np.ceil(_CARRIER_SAMPLES_MIN * omega * tau / (2.0 * np.pi))) + 1)
    return n + (n % 2)


class DetuneFamily:
    """Two-parameter waveform family theta = (omega, a) for parametric fits."""

    def __init__(self, u_max: float, tau: float):
        self.u_max = u_max
        self.tau = tau

    def values(self, theta, t_mid):
        omega, a = theta
        return self.u_max * np.sin(omega * (t_mid - 0.5 * self.tau) + a * np.pi)

    def jacobian(self, theta, t_mid):
        omega, a = theta
        c = self.u_max * np.cos(omega * (t_mid - 0.5 * self.tau) + a * np.pi)
        return np.stack([c * (t_mid - 0.5 * self.tau), c * np.pi])


def optimize_detune_full(u_max: float, tau: float, init: DetuneParams = None,
                         model: SensorModel = None, n_t: int = None,
                         max_iters: int = 300) -> DetuneFullResult:
    """Maximize eta^2 of the detune family under full lab-frame dynamics.

    Multi-starts over phases a in {0, 0.25, 0.5, 0.75} and both signs of the
    approximate frame offset (plus `init` if given), polishing each with the
    exact parametric gradient; declares convergence when the winning start's
    gradient norm drops below 1e-6 of its initial value.
    """
    from .optimal_control import CostKind, optimize_parametric

    if model is None:
        model = SensorModel()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        dw0 = approx_detune(u_max, tau)
    omega_floor = 1e-2 * model.omega0
    starts = [(max(model.omega0 + s * dw0, 5.0 * omega_floor), a)
              for s in (+1.0, -1.0) for a in (0.0, 0.25, 0.5, 0.75)]
    if init is not None:
        starts.append((init.omega, init.a))
    if n_t is None:
        n_t = _detune_n_t(max(w for w, _ in starts), tau)
    family = DetuneFamily(u_max, tau)
    cost = CostKind("EtaSquared")
    bounds = [(omega_floor, None), (None, None)]
    best = None
    for theta0 in starts:
        fit = optimize_parametric(model, family, np.array(theta0), tau, n_t,
                                  u_max, cost, max_iters=max_iters,
                                  bounds=bounds)
        if best is None or fit.cost < best.cost:
            best = fit
    omega_fit, a_fit = best.theta
    params = DetuneParams(u_max, tau, float(omega_fit), float(a_fit),
                          omega0=model.omega0)
    return DetuneFullResult(params=params, eta=float(best.eta),
                            converged=bool(best.converged),
                            grad_ratio=float(best.grad_ratio))
