"""Time-domain response kernel of a fixed protocol.

For a protocol of duration tau, the kernel K(t') relates a weak time-varying
field to the shift of the outcome probability, delta p = integral of
K(t') delta_omega(t') dt' over the window t' in [-tau/2, tau/2] (offsets
measured from the window center). K is built numerically by inserting a
small-area rectangular field impulse into one control interval at a time and
taking the symmetric difference of the outcome probability; a closed form is
available for the rotating-frame YX sequence.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import (ControlWaveform, Protocol, SensorModel,
                       interval_hamiltonians, interval_propagators)

IMPULSE_AREA_DEFAULT = 1e-3   # rad; stays deep in the linear-response regime
IMPULSE_AREA_MAX = 0.1        # rad; beyond this the response is not linear


@dataclass(frozen=True)
class KernelSamples:
    """Kernel values at window offsets, with the generating protocol.

    centers lie in [-tau/2, tau/2]; integral is the midpoint-rule quadrature
    of the samples, which should reproduce the protocol sensitivity.
    """

    centers: np.ndarray
    values: np.ndarray
    protocol: Protocol
    integral: float = None

    def __post_init__(self):
        object.__setattr__(self, "centers", np.asarray(self.centers, dtype=float))
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        if self.centers.shape != self.values.shape or self.centers.ndim != 1:
            raise ValueError("centers and values must be matching 1-D arrays")
        if len(self.centers) < 2:
            raise ValueError("need at least two kernel samples")
        steps = np.diff(self.centers)
        if np.any(steps <= 0) or np.ptp(steps) > 1e-9 * steps[0]:
            raise ValueError("centers must be uniformly increasing")
        half = 0.5 * self.protocol.tau
        if self.centers[0] < -half - 1e-9 or self.centers[-1] > half + 1e-9:
            raise ValueError("centers must lie within [-tau/2, tau/2]")
        if self.integral is None:
            object.__setattr__(self, "integral",
                               float(np.sum(self.values) * steps[0]))

    @property
    def spacing(self) -> float:
        return float(self.centers[1] - self.centers[0])


def numerical_kernel(model: SensorModel, protocol: Protocol,
                     n_centers: int = 200,
                     impulse_area: float = IMPULSE_AREA_DEFAULT) -> KernelSamples:
    """Impulse-response kernel of a protocol, lab or rotating frame.

    Impulses are one-interval rectangles of field area +/- impulse_area
    centered on every (n_t/n_centers)-th control interval; the kernel sample
    is the symmetric probability difference divided by twice the area. The
    baseline chain is factored into prefix states and suffix rows, so each
    center costs two 4x4 products rather than a full re-propagation.
    """
    if n_centers < 50:
        raise ValueError("n_centers must be at least 50")
    if not 0 < impulse_area <= IMPULSE_AREA_MAX:
        raise ValueError(
            "impulse area %g rad outside (0, %g]: refine the grid or shrink "
            "the area to stay in the linear regime"
            % (impulse_area, IMPULSE_AREA_MAX))
    n_t = protocol.n_t
    if n_t % n_centers != 0:
        raise ValueError("n_t=%d is not a multiple of n_centers=%d: refine "
                         "the control grid" % (n_t, n_centers))
    dt = protocol.tau / n_t
    P = interval_propagators(model, protocol, delta_omega=0.0)

    # prefix states s_k (state before interval k) and suffix rows r_k with
    # r_k = e0^T P_{n-1} ... P_k, so amp0 = r_{k+1} (P~_k s_k) for a modified
    # interval k
    S = np.empty((n_t + 1, 4), dtype=complex)
    psi = np.zeros(4, dtype=complex)
    psi[0] = 1.0
    S[0] = psi
    for k in range(n_t):
        psi = P[k] @ psi
        S[k + 1] = psi
    R = np.empty((n_t + 1, 4), dtype=complex)
    row = np.zeros(4, dtype=complex)
    row[0] = 1.0
    R[n_t] = row
    for k in range(n_t - 1, -1, -1):
        row = row @ P[k]
        R[k] = row

    hx, hy, hz = interval_hamiltonians(model, protocol, delta_omega=0.0)
    stride = n_t // n_centers
    idx = np.arange(n_centers) * stride + stride // 2
    shift = 0.5 * impulse_area / dt  # hz shift for field height area/dt

    from .dynamics import _block, _interval_ops  # engine internals

    values = np.empty(n_centers)
    for i, k in enumerate(idx):
        ps = []
        for sgn in (+1.0, -1.0):
            U, L = _interval_ops(hx[k], hy[k], hz[k] + sgn * shift, dt)
            amp = R[k + 1] @ (_block(U, L)[0] @ S[k])
            ps.append(np.abs(amp) ** 2)
        values[i] = (ps[0] - ps[1]) / (2.0 * impulse_area)

    centers = (idx + 0.5) * dt - 0.5 * protocol.tau
    return KernelSamples(centers=centers, values=values, protocol=protocol)


def analytic_kernel_yx_rwa(u_max: float, tau: float,
                           n_centers: int = 200) -> KernelSamples:
    """Closed-form rotating-frame kernel of the YX sequence.

    K(t') = (1/2) sin(u_max tau / 2) sin(u_max (tau/2 - |t'|)) inside the
    window, zero outside; its integral equals the rotating-frame YX
    sensitivity exactly for tau <= t_QSL.
    """
    from .protocols import YXParams, yx_rwa_protocol

    if not (u_max > 0 and tau > 0):
        raise ValueError("u_max and tau must be positive")
    spacing = tau / n_centers
    centers = (np.arange(n_centers) + 0.5) * spacing - 0.5 * tau
    values = (0.5 * np.sin(0.5 * u_max * tau)
              * np.sin(u_max * (0.5 * tau - np.abs(centers))))
    protocol = yx_rwa_protocol(YXParams(u_max, tau))
    return KernelSamples(centers=centers, values=values, protocol=protocol)


def convolve_predict(kernel: KernelSamples, field_values: np.ndarray) -> float:
    """Midpoint-rule convolution of the kernel with a field on its grid."""
    f = np.asarray(field_values, dtype=float)
    if f.shape != kernel.centers.shape:
        raise ValueError("field must be sampled on the kernel's center grid")
    return float(np.sum(kernel.values * f) * kernel.spacing)
