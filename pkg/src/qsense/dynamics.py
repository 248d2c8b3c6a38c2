"""Exact augmented dynamics of a single driven qubit.

The sensor is a two-level system H = ((omega0 + delta_omega)/2) sigma_z
+ u(t) sigma_x with hbar = 1 and piecewise-constant control u(t). Alongside
the state psi0 we propagate its field derivative psi1 = d psi0 / d delta_omega,
so outcome probability, sensitivity and quantum Fisher information come out
of a single pass with no finite differencing. Each interval is advanced by
the exact exponential of the constant 4x4 block-lower-triangular generator

    G = [[H, 0], [sigma_z/2, H]]

evaluated in closed form, so there is no time-splitting error and grid
refinement with frozen control values is an exact no-op.

A rotating-frame mode is provided through RWAProtocol: piecewise-constant
segments of the time-independent rotating-frame generator
((delta_omega - frame_detune)/2) sigma_z + (amp/2)(cos(phase) sigma_x
+ sin(phase) sigma_y), propagated by the same engine.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
IDENT_2 = np.eye(2, dtype=complex)

KET_0 = np.array([1.0, 0.0], dtype=complex)

NORM_TOL = 1e-10
ORTHO_TOL = 1e-8


# ---------------------------------------------------------------------------
# domain types


@dataclass(frozen=True)
class SensorModel:
    """Static sensor parameters: carrier frequency and the field to measure.

    Dimensionless convention: energies in units of hbar*omega0, times in
    units of 1/omega0, so omega0 defaults to 1.
    """

    omega0: float = 1.0
    delta_omega: float = 0.0

    def __post_init__(self):
        if not self.omega0 > 0:
            raise ValueError("omega0 must be positive")
        if not np.isfinite(self.omega0) or not np.isfinite(self.delta_omega):
            raise ValueError("non-finite model parameters")


@dataclass(frozen=True)
class ControlWaveform:
    """Piecewise-constant lab-frame control: n_t equal intervals over [0, tau].

    values[i] is the amplitude held on interval i; samples are conventionally
    taken at interval midpoints when discretizing a continuous waveform.
    """

    tau: float
    n_t: int
    values: np.ndarray
    u_max: float

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        if self.n_t < 1:
            raise ValueError("n_t must be at least 1")
        if not self.tau > 0:
            raise ValueError("tau must be positive")
        if not self.u_max > 0:
            raise ValueError("u_max must be positive")
        if self.values.shape != (self.n_t,):
            raise ValueError("values must have shape (n_t,)")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("non-finite control values")
        if np.max(np.abs(self.values)) > self.u_max + 1e-12:
            raise ValueError("control values exceed the amplitude bound")

    @property
    def dt(self) -> float:
        return self.tau / self.n_t

    @property
    def t_qsl(self) -> float:
        # minimal duration of a full bounded-amplitude spin flip
        return np.pi / self.u_max

    @property
    def midpoints(self) -> np.ndarray:
        return (np.arange(self.n_t) + 0.5) * self.dt

    def refine(self, factor: int) -> "ControlWaveform":
        """Same piecewise-constant control on a grid `factor` times finer."""
        if factor < 1 or int(factor) != factor:
            raise ValueError("refinement factor must be a positive integer")
        return ControlWaveform(self.tau, self.n_t * factor,
                               np.repeat(self.values, factor), self.u_max)


@dataclass(frozen=True)
class RWASegment:
    """One constant rotating-frame drive segment.

    amplitude is the lab-frame drive amplitude; the rotating-frame generator
    carries amplitude/2 on the transverse axis set by phase, and frame_detune
    is the drive-minus-carrier frequency offset entering the sigma_z term.
    """

    duration: float
    amplitude: float
    phase: float
    frame_detune: float = 0.0

    def __post_init__(self):
        if not self.duration >= 0:
            raise ValueError("segment duration must be nonnegative")


@dataclass(frozen=True)
class RWAProtocol:
    """Piecewise-constant rotating-frame protocol on a uniform coupling grid.

    n_t sets the grid used when a time-varying field must be injected
    (response kernels, calibration); segment boundaries must land on grid
    lines. With a constant field the propagation is exact for any n_t.
    """

    segments: tuple
    n_t: int
    u_max: float

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))
        if len(self.segments) == 0:
            raise ValueError("protocol needs at least one segment")
        if self.n_t < 1:
            raise ValueError("n_t must be at least 1")
        if not self.u_max > 0:
            raise ValueError("u_max must be positive")
        self.interval_arrays()  # validates grid alignment

    @property
    def tau(self) -> float:
        return float(sum(s.duration for s in self.segments))

    @property
    def dt(self) -> float:
        return self.tau / self.n_t

    @property
    def t_qsl(self) -> float:
        return np.pi / self.u_max

    @property
    def midpoints(self) -> np.ndarray:
        return (np.arange(self.n_t) + 0.5) * self.dt

    def interval_arrays(self):
        """Per-interval (amplitude, phase, frame_detune) on the uniform grid."""
        tau = self.tau
        if not tau > 0:
            raise ValueError("protocol duration must be positive")
        dt = tau / self.n_t
        edges = np.cumsum([s.duration for s in self.segments])
        for b in edges[:-1]:
            if abs(b / dt - round(b / dt)) > 1e-9:
                raise ValueError(
                    "segment boundary at t=%g does not align with the n_t=%d grid"
                    % (b, self.n_t))
        amp = np.empty(self.n_t)
        phase = np.empty(self.n_t)
        dframe = np.empty(self.n_t)
        tm = self.midpoints
        idx = np.searchsorted(edges, tm)
        for j, seg in enumerate(self.segments):
            sel = idx == j
            amp[sel] = seg.amplitude
            phase[sel] = seg.phase
            dframe[sel] = seg.frame_detune
        return amp, phase, dframe


Protocol = Union[ControlWaveform, RWAProtocol]


@dataclass(frozen=True)
class AugmentedState:
    """Qubit state psi0 and its field derivative psi1 = d psi0/d delta_omega."""

    psi0: np.ndarray
    psi1: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "psi0", np.asarray(self.psi0, dtype=complex))
        object.__setattr__(self, "psi1", np.asarray(self.psi1, dtype=complex))
        if self.psi0.shape != (2,) or self.psi1.shape != (2,):
            raise ValueError("psi0 and psi1 must be complex 2-vectors")

    def check(self):
        """Enforce the norm and derivative-orthogonality invariants."""
        if abs(np.linalg.norm(self.psi0) - 1.0) > NORM_TOL:
            raise ValueError("psi0 norm deviates from 1 beyond tolerance")
        if abs(np.real(np.vdot(self.psi0, self.psi1))) > ORTHO_TOL:
            raise ValueError("Re<psi0|psi1> deviates from 0 beyond tolerance")

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.psi0, self.psi1])

    @staticmethod
    def from_vector(v: np.ndarray) -> "AugmentedState":
        v = np.asarray(v, dtype=complex)
        return AugmentedState(v[:2], v[2:])


@dataclass(frozen=True)
class Trajectory:
    """States at the n_t+1 grid times, plus the generating protocol and model.

    states is an (n_t+1, 4) complex array; row k stacks (psi0, psi1) at time
    k*dt. Row 0 is (|0>, 0) unless an explicit initial state was supplied.
    """

    states: np.ndarray
    waveform: Protocol
    model: SensorModel

    @property
    def times(self) -> np.ndarray:
        n = self.states.shape[0] - 1
        return np.linspace(0.0, self.waveform.tau, n + 1)

    def state(self, k: int) -> AugmentedState:
        return AugmentedState.from_vector(self.states[k])

    @property
    def final(self) -> AugmentedState:
        return AugmentedState.from_vector(self.states[-1])

    def probability(self) -> float:
        return float(np.abs(self.states[-1, 0]) ** 2)

    def sensitivity(self) -> float:
        f = self.states[-1]
        return float(2.0 * np.real(np.conj(f[0]) * f[2]))

    def qfi(self) -> float:
        p0, p1 = self.states[-1, :2], self.states[-1, 2:]
        return float(4.0 * (np.real(np.vdot(p1, p1)) - np.abs(np.vdot(p0, p1)) ** 2))


# ---------------------------------------------------------------------------
# exact interval exponentials

def _gg(x):
    # (sinc(x) - cos(x)) / x^2 with a series branch for small |x|
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < 0.1
    xs = np.where(small, 1.0, x)
    direct = (np.sinc(xs / np.pi) - np.cos(xs)) / (xs * xs)
    x2 = x * x
    series = 1.0 / 3.0 - x2 / 30.0 + x2 * x2 / 840.0 - x2 * x2 * x2 / 45360.0
    return np.where(small, series, direct)


def _interval_ops(hx, hy, hz, dt):
    """Exact blocks of exp(-i dt G) for H = hx sx + hy sy + hz sz.

    Returns (U, L): the 2x2 unitary U = exp(-i dt H) and the lower-left
    block L in [[U, 0], [L, U]] arising from the sigma_z/2 derivative
    coupling. Division-free in the rotation angle, so the hx=hy=hz=0 limit
    is exact.
    """
    hx, hy, hz = np.broadcast_arrays(
        *(np.atleast_1d(np.asarray(a, dtype=float)) for a in (hx, hy, hz)))
    mu = np.sqrt(hx * hx + hy * hy + hz * hz)
    x = mu * dt
    H = (hx[..., None, None] * SIGMA_X + hy[..., None, None] * SIGMA_Y
         + hz[..., None, None] * SIGMA_Z)
    snc = np.sinc(x / np.pi)
    U = np.cos(x)[..., None, None] * IDENT_2 - 1j * (dt * snc)[..., None, None] * H
    L = (np.asarray(-0.5j * dt * snc)[..., None, None] * SIGMA_Z
         - np.asarray(0.5 * hz * dt * dt * snc)[..., None, None] * IDENT_2
         + np.asarray(1j * hz * 0.5 * dt ** 3 * _gg(x))[..., None, None] * H)
    return U, L


def _block(U, L):
    n = U.shape[0]
    P = np.zeros((n, 4, 4), dtype=complex)
    P[:, :2, :2] = U
    P[:, 2:, 2:] = U
    P[:, 2:, :2] = L
    return P


def _field_per_interval(protocol: Protocol, delta_omega) -> np.ndarray:
    dom = np.asarray(delta_omega, dtype=float)
    if dom.ndim == 0:
        return np.full(protocol.n_t, float(dom))
    if dom.shape != (protocol.n_t,):
        raise ValueError("per-interval field must have shape (n_t,)")
    return dom


def interval_hamiltonians(model: SensorModel, protocol: Protocol,
                          delta_omega=None) -> tuple:
    """Per-interval Bloch components (hx, hy, hz) of the interval Hamiltonian."""
    if delta_omega is None:
        delta_omega = model.delta_omega
    dom = _field_per_interval(protocol, delta_omega)
    if isinstance(protocol, ControlWaveform):
        hx = protocol.values.copy()
        hy = np.zeros(protocol.n_t)
        hz = 0.5 * (model.omega0 + dom)
    else:
        amp, phase, dframe = protocol.interval_arrays()
        hx = 0.5 * amp * np.cos(phase)
        hy = 0.5 * amp * np.sin(phase)
        hz = 0.5 * (dom - dframe)
    return hx, hy, hz


def interval_propagators(model: SensorModel, protocol: Protocol,
                         delta_omega=None, dt_scale: float = 1.0) -> np.ndarray:
    """All n_t exact 4x4 augmented interval propagators, stacked.

    dt_scale rescales the interval length (dt_scale=0.5 gives half-interval
    propagators, used by quadrature rules that need mid-interval states).
    """
    hx, hy, hz = interval_hamiltonians(model, protocol, delta_omega)
    U, L = _interval_ops(hx, hy, hz, protocol.dt * dt_scale)
    return _block(U, L)


def _chain(P: np.ndarray, init4: np.ndarray) -> np.ndarray:
    n = P.shape[0]
    S = np.empty((n + 1, 4), dtype=complex)
    psi = init4.astype(complex)
    S[0] = psi
    for k in range(n):
        psi = P[k] @ psi
        S[k + 1] = psi
    return S


# ---------------------------------------------------------------------------
# operations


def propagate_interval(state: AugmentedState, u: float, model: SensorModel,
                       dt: float, delta_omega: float = None) -> AugmentedState:
    """Advance one augmented state through one constant-control interval.

    Exact to machine precision: applies exp(-i dt G) with G the 4x4
    block-lower-triangular generator of the state and its field derivative.
    """
    if not np.isfinite(u) or not np.isfinite(dt):
        raise ValueError("non-finite control or interval length")
    if dt < 0:
        raise ValueError("interval length must be nonnegative")
    if delta_omega is None:
        delta_omega = model.delta_omega
    if not np.isfinite(delta_omega):
        raise ValueError("non-finite field value")
    v = state.as_vector()
    if not np.all(np.isfinite(v.view(float))):
        raise ValueError("non-finite state")
    U, L = _interval_ops(u, 0.0, 0.5 * (model.omega0 + delta_omega), dt)
    P = _block(U, L)[0]
    return AugmentedState.from_vector(P @ v)


def evolve(model: SensorModel, waveform: Protocol, delta_omega=None,
           initial_psi0: np.ndarray = None) -> Trajectory:
    """Propagate (|0>, 0) through every interval of the protocol.

    delta_omega may be None (use model.delta_omega), a scalar, or an array
    of per-interval values for a time-varying field. initial_psi0 overrides
    the |0> preparation (the derivative component always starts at 0).
    """
    P = interval_propagators(model, waveform, delta_omega)
    init = np.zeros(4, dtype=complex)
    if initial_psi0 is None:
        init[:2] = KET_0
    else:
        psi = np.asarray(initial_psi0, dtype=complex)
        if psi.shape != (2,):
            raise ValueError("initial_psi0 must be a complex 2-vector")
        if abs(np.linalg.norm(psi) - 1.0) > NORM_TOL:
            raise ValueError("initial state must be normalized")
        init[:2] = psi
    states = _chain(P, init)
    return Trajectory(states, waveform, model)


def final_state(model: SensorModel, waveform: Protocol,
                delta_omega=None) -> AugmentedState:
    """Final augmented state only, via pairwise product reduction.

    Same result as evolve(...).final up to rounding, but the propagator
    product is folded tree-wise in O(log n) vectorized matmul passes, which
    is several times faster than the sequential chain when intermediate
    states are not needed (line searches, sweeps).
    """
    P = interval_propagators(model, waveform, delta_omega)
    while P.shape[0] > 1:
        half = P.shape[0] // 2
        head = np.matmul(P[1:2 * half:2], P[0:2 * half:2])
        P = np.concatenate([head, P[2 * half:]]) if P.shape[0] % 2 else head
    init = np.zeros(4, dtype=complex)
    init[0] = 1.0
    return AugmentedState.from_vector(P[0] @ init)


def evolve_batch(model: SensorModel, tau: float, value_rows: np.ndarray,
                 u_max: float, delta_omega=0.0) -> np.ndarray:
    """Final augmented vectors for a batch of lab-frame waveforms.

    value_rows has shape (m, n_t): one piecewise-constant waveform per row,
    all on the same grid. Returns an (m, 4) array of final states. Used for
    vectorized finite-difference oracles and sweeps.
    """
    V = np.asarray(value_rows, dtype=float)
    if V.ndim != 2:
        raise ValueError("value_rows must be 2-D (m, n_t)")
    m, n = V.shape
    dt = tau / n
    dom = np.asarray(delta_omega, dtype=float)
    hz = np.broadcast_to(0.5 * (model.omega0 + dom), (m, n))
    U, L = _interval_ops(V, np.zeros_like(V), hz, dt)
    P = np.zeros((m, n, 4, 4), dtype=complex)
    P[:, :, :2, :2] = U
    P[:, :, 2:, 2:] = U
    P[:, :, 2:, :2] = L
    S = np.zeros((m, 4), dtype=complex)
    S[:, 0] = 1.0
    for k in range(n):
        S = np.einsum("mij,mj->mi", P[:, k], S)
    return S


def outcome_probability(model: SensorModel, waveform: Protocol,
                        delta_omega=None) -> float:
    """p = |<0|psi0(tau)>|^2, the |0>-readout probability."""
    return evolve(model, waveform, delta_omega).probability()


def sensitivity(model: SensorModel, waveform: Protocol) -> float:
    """eta = dp/d delta_omega at delta_omega = 0, from the augmented state.

    Signed; callers interested only in precision may take the magnitude.
    """
    return evolve(model, waveform, delta_omega=0.0).sensitivity()


def qfi(model: SensorModel, waveform: Protocol) -> float:
    """Quantum Fisher information 4[<psi1|psi1> - |<psi0|psi1>|^2] at tau."""
    return evolve(model, waveform, delta_omega=0.0).qfi()


def bloch_vector(psi0: np.ndarray) -> np.ndarray:
    """(<sigma_x>, <sigma_y>, <sigma_z>) of a normalized pure state."""
    psi = np.asarray(psi0, dtype=complex)
    if psi.shape != (2,):
        raise ValueError("psi0 must be a complex 2-vector")
    if abs(np.linalg.norm(psi) - 1.0) > 1e-8:
        raise ValueError("bloch_vector requires a normalized state")
    x = 2.0 * np.real(np.conj(psi[0]) * psi[1])
    y = 2.0 * np.imag(np.conj(psi[0]) * psi[1])
    z = np.abs(psi[0]) ** 2 - np.abs(psi[1]) ** 2
    return np.array([x, y, z])
