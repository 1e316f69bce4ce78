"""Pseudospectral FFT + classical RK4 integrator for the coupled cubic system.

The pair (u, v) evolves by
    i u_t + u_xx + (alpha |u|^2 + beta |v|^2) u = 0,
    i v_t + v_xx + (beta |u|^2 + gamma |v|^2) v = 0,
discretized in space by the discrete Fourier transform on M uniform nodes
and advanced in spectral space with the classic fourth-order Runge-Kutta
scheme.  The nonlinearity is formed pointwise in physical space; an optional
2/3-rule mask removes the aliased top third of modes.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

try:
    import scipy.fft as _fft
except ImportError:  # pragma: no cover
    _fft = np.fft

from .fourier import RationalTime, TimeLike, time_value

MIN_LOG2_M = 7
MAX_LOG2_M = 14

# y = dt * (M/2)^2 is the RK4 argument at the highest retained mode; the
# scheme is stable on the imaginary axis for |y| <= 2*sqrt(2).  Above 1.0
# the per-step phase error at the top modes becomes visible, so warn there.
STABILITY_HARD_LIMIT = 2.0 * math.sqrt(2.0)
STABILITY_WARN_LIMIT = 1.0


class DivergedError(RuntimeError):
    def __init__(self, message, t=None, stage=None):
        super().__init__(message)
        self.t = t
        self.stage = stage


@dataclass
class GridField:
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        M = len(self.values)
        if M & (M - 1) or not (2 ** MIN_LOG2_M <= M <= 2 ** MAX_LOG2_M):
            raise ValueError(f"grid length {M} must be a power of two in [2^7, 2^14]")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("non-finite field values")

    @property
    def M(self) -> int:
        return len(self.values)


@dataclass
class ManakovState:
    u: GridField
    v: GridField
    t: float

    def __post_init__(self):
        if self.u.M != self.v.M:
            raise ValueError("components must share the grid")


@dataclass
class SolverConfig:
    M: int = 512
    dt: Optional[float] = None
    dealias: bool = False
    coupling: tuple = (1.0, 1.0, 1.0)
    linear_only: bool = False

    def resolved_dt(self) -> float:
        half = self.M // 2
        dt = self.dt if self.dt is not None else 0.5 / half ** 2
        y = dt * half ** 2
        if y > STABILITY_HARD_LIMIT:
            raise ValueError(
                f"dt * (M/2)^2 = {y:.3f} exceeds the RK4 stability limit {STABILITY_HARD_LIMIT:.3f}"
            )
        if y > STABILITY_WARN_LIMIT:
            warnings.warn(
                f"dt * (M/2)^2 = {y:.3f} > {STABILITY_WARN_LIMIT}: top-mode phase error "
                "may be significant",
                stacklevel=2,
            )
        return dt


@dataclass
class ConservedTriple:
    norm_u_sq: float
    norm_v_sq: float
    inner_uv: complex


def conserved(state: ManakovState) -> ConservedTriple:
    """Spectral quadrature of the three invariants (exact for trig polynomials)."""
    u = state.u.values
    v = state.v.values
    w = 2.0 * math.pi / len(u)
    return ConservedTriple(
        norm_u_sq=float(np.sum(np.abs(u) ** 2)) * w,
        norm_v_sq=float(np.sum(np.abs(v) ** 2)) * w,
        inner_uv=complex(np.sum(np.conj(u) * v)) * w,
    )


def _wavenumbers_sq(M: int) -> np.ndarray:
    k = np.fft.fftfreq(M, 1.0 / M)
    return k * k


def _dealias_mask(M: int) -> np.ndarray:
    k = np.abs(np.fft.fftfreq(M, 1.0 / M))
    return (k <= M / 3.0).astype(float)


def _rhs_spectral(c: np.ndarray, ksq: np.ndarray, coupling, linear_only: bool,
                  mask: Optional[np.ndarray]) -> np.ndarray:
    """Spectral time derivative of the stacked coefficient pair c = (u_hat, v_hat)."""
    if linear_only:
        return -1j * ksq * c
    al, be, ga = coupling
    M = c.shape[1]
    # ifft of the /M-normalized coefficients is u/M; fold the M^2 back into
    # the squared moduli so the cubic term carries the right amplitude.
    ph = _fft.ifft(c, axis=1)
    scale = float(M) * float(M)
    mod_u = (ph[0].real ** 2 + ph[0].imag ** 2) * scale
    mod_v = (ph[1].real ** 2 + ph[1].imag ** 2) * scale
    ph[0] *= al * mod_u + be * mod_v
    ph[1] *= be * mod_u + ga * mod_v
    nl = _fft.fft(ph, axis=1, overwrite_x=True)
    if mask is not None:
        nl *= mask
    out = nl - ksq * c
    out *= 1j
    return out


def _state_to_spectral(state: ManakovState) -> np.ndarray:
    M = state.u.M
    return _fft.fft(np.array([state.u.values, state.v.values]), axis=1) / M


def _spectral_to_state(c: np.ndarray, t: float) -> ManakovState:
    M = c.shape[1]
    ph = _fft.ifft(c * M, axis=1)
    return ManakovState(GridField(ph[0]), GridField(ph[1]), t)


def rhs(state: ManakovState, config: SolverConfig):
    """Spectral derivatives (du_hat/dt, dv_hat/dt) at the current state."""
    c = _state_to_spectral(state)
    ksq = _wavenumbers_sq(state.u.M)
    mask = _dealias_mask(state.u.M) if config.dealias else None
    out = _rhs_spectral(c, ksq, config.coupling, config.linear_only, mask)
    if not np.all(np.isfinite(out)):
        raise DivergedError("non-finite spectral derivative", t=state.t)
    return out[0], out[1]


def rk4_step(state: ManakovState, config: SolverConfig, dt: Optional[float] = None) -> ManakovState:
    """One classical four-stage step; raises on the first non-finite stage."""
    h = dt if dt is not None else config.resolved_dt()
    M = state.u.M
    ksq = _wavenumbers_sq(M)
    mask = _dealias_mask(M) if config.dealias else None
    c = _state_to_spectral(state)
    stages = []
    for idx, coef_in in enumerate([0.0, 0.5, 0.5, 1.0]):
        arg = c if idx == 0 else c + (coef_in * h) * stages[-1]
        kst = _rhs_spectral(arg, ksq, config.coupling, config.linear_only, mask)
        if not np.all(np.isfinite(kst)):
            raise DivergedError(f"non-finite values in RK4 stage {idx + 1}",
                                t=state.t, stage=idx + 1)
        stages.append(kst)
    c_new = c + (h / 6.0) * (stages[0] + 2.0 * stages[1] + 2.0 * stages[2] + stages[3])
    return _spectral_to_state(c_new, state.t + h)


@dataclass
class SimulationResult:
    final: ManakovState
    snapshots: list
    conservation: list  # rows (t, ConservedTriple)


def _integrate(c: np.ndarray, t0: float, t1: float, dt: float, ksq, coupling,
               linear_only: bool, mask, observer=None, observer_stride: int = 0,
               check_stride: int = 64) -> float:
    """Advance c in place from t0 to t1, landing on t1 exactly."""
    span = t1 - t0
    if span <= 0:
        return t0
    n = max(1, int(math.ceil(span / dt - 1e-12)))
    h = span / n
    t = t0
    for i in range(n):
        k1 = _rhs_spectral(c, ksq, coupling, linear_only, mask)
        k2 = _rhs_spectral(c + (h / 2) * k1, ksq, coupling, linear_only, mask)
        k3 = _rhs_spectral(c + (h / 2) * k2, ksq, coupling, linear_only, mask)
        k4 = _rhs_spectral(c + h * k3, ksq, coupling, linear_only, mask)
        k2 += k3
        k2 *= 2.0
        k2 += k1
        k2 += k4
        k2 *= h / 6.0
        c += k2
        t = t0 + (i + 1) * h
        if (i + 1) % check_stride == 0 or i == n - 1:
            if not np.isfinite(c.real.sum() + c.imag.sum()):
                raise DivergedError("solution diverged", t=t)
        if observer is not None and observer_stride and (i + 1) % observer_stride == 0:
            observer(_spectral_to_state(c.copy(), t))
    return t1


def simulate(
    f: GridField,
    g: GridField,
    config: SolverConfig,
    t_final: TimeLike,
    snapshot_times: Sequence[TimeLike] = (),
    conservation_stride: int = 0,
) -> SimulationResult:
    """Integrate from t = 0 to t_final, landing exactly on each snapshot time.

    Snapshot times must lie in [0, t_final]; the step is shortened before
    each target rather than interpolating.  When conservation_stride > 0 the
    invariant triple is recorded every that many steps (plus the endpoints).
    """
    if f.M != g.M or f.M != config.M:
        raise ValueError("initial data grid does not match config.M")
    dt = config.resolved_dt()
    tf = time_value(t_final)
    if tf < 0:
        raise ValueError("t_final must be nonnegative")
    targets = sorted({round(time_value(s), 15) for s in snapshot_times})
    for s in targets:
        if s < 0 or s > tf + 1e-12:
            raise ValueError(f"snapshot time {s} outside [0, t_final]")
    M = config.M
    ksq = _wavenumbers_sq(M)
    mask = _dealias_mask(M) if config.dealias else None
    c = _fft.fft(np.array([f.values, g.values]), axis=1) / M

    snapshots = []
    conservation = []

    def record_conservation(state):
        conservation.append((state.t, conserved(state)))

    observer = record_conservation if conservation_stride > 0 else None
    if observer is not None:
        observer(_spectral_to_state(c.copy(), 0.0))

    time_index = {}
    for orig in snapshot_times:
        time_index.setdefault(round(time_value(orig), 15), orig)

    t = 0.0
    try:
        for s in targets:
            t = _integrate(c, t, s, dt, ksq, config.coupling, config.linear_only,
                           mask, observer, conservation_stride)
            snap = _spectral_to_state(c.copy(), s)
            snap_t = time_index.get(s, s)
            snapshots.append((snap_t, snap))
        t = _integrate(c, t, tf, dt, ksq, config.coupling, config.linear_only,
                       mask, observer, conservation_stride)
    except DivergedError as err:
        raise DivergedError(f"diverged at t = {err.t}", t=err.t) from None
    final = _spectral_to_state(c, tf)
    if observer is not None and (not conservation or conservation[-1][0] != tf):
        observer(final)
    return SimulationResult(final=final, snapshots=snapshots, conservation=conservation)
