"""Closed-form Fourier evaluation of the two-component linear flows.

Covers the periodic Riemann problem (step initial data) for both the
distinct-branch and the degenerate-discriminant cases, general BV initial
data for quartets passing the quantization check, and the explicit linear
part of the coupled cubic flow written in terms of the conserved scalars
of the initial data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .dispersion import (
    ComplexBranchError,
    DispersionQuartet,
    IntegralPolynomial,
    WeightUndefinedError,
    quantization_check,
)
from .fourier import (
    FourierData,
    RationalTime,
    TimeLike,
    evaluate_modes,
    phase,
    poly_phases,
    riemann_coefficient,
    time_value,
)


class DegenerateBranchError(ValueError):
    """a1 = a2: the two exponential branches coincide."""


@dataclass
class LinearSolutionSample:
    x_grid: np.ndarray
    u_values: np.ndarray
    v_values: np.ndarray
    N: int
    t: TimeLike

    def __post_init__(self):
        if len(self.u_values) != len(self.x_grid) or len(self.v_values) != len(self.x_grid):
            raise ValueError("component arrays must match the grid length")
        if not (np.all(np.isfinite(self.u_values)) and np.all(np.isfinite(self.v_values))):
            raise ValueError("non-finite values in solution sample")


def _degenerate_diagonal(quartet: DispersionQuartet, k: int) -> bool:
    """Modes where the coupling vanishes and both diagonal symbols agree.

    The branch formulas divide by sqrt(Delta) and phi2; at such modes
    (k = 0 for symbols without constant term is the common case) the system
    is diagonal and each component just rotates by its own symbol.
    """
    p1, p2, p3, p4 = quartet.symbol_values(k)
    return p2 == 0 and p3 == 0 and p1 == p4


def solve_riemann_case1(
    quartet: DispersionQuartet, t: TimeLike, x_grid: np.ndarray, N: int
) -> LinearSolutionSample:
    """Step-data solution when Delta(k) > 0 on the active modes.

    u = sum (a_k^1 e^{i(kx - omega1 t)} + a_k^2 e^{i(kx - omega2 t)}),
    v carries the extra branch weights phi(k), psi(k).  Phases are reduced
    exactly in integer arithmetic at rational times whenever the branch
    frequencies are integers.
    """
    exact = not quartet.has_offsets()
    ks, u_modes, v_modes = [], [], []
    for k in range(-N, N + 1):
        ck = riemann_coefficient(k)
        if ck == 0:
            continue
        p1, p2, p3, p4 = quartet.symbol_values(k)
        d = (p1 - p4) ** 2 + 4 * p2 * p3
        if d == 0 and _degenerate_diagonal(quartet, k):
            # Uncoupled mode rotating by its own diagonal symbol.
            e1 = phase(p1, t)
            ks.append(k)
            u_modes.append(ck * e1)
            v_modes.append(ck * e1)
            continue
        if d <= 0:
            raise ComplexBranchError(f"Delta({k}) = {d} <= 0 on an active mode")
        if p2 == 0:
            raise WeightUndefinedError(f"phi2({k}) = 0 on an active mode")
        if exact:
            s = math.isqrt(d)
            if s * s == d:
                # -2*omega_{1,2} are integers even when omega itself is a
                # half-integer; reduce the doubled numerators exactly.
                m1 = p1 + p4 + s
                m2 = p1 + p4 - s
                if isinstance(t, RationalTime):
                    half = RationalTime(t.p, 2 * t.q)
                    e1 = phase(m1, half)
                    e2 = phase(m2, half)
                else:
                    e1 = phase(m1 / 2.0, t)
                    e2 = phase(m2 / 2.0, t)
                root = float(s)
            else:
                root = math.sqrt(float(d))
                e1 = phase((float(p1 + p4) + root) / 2.0, t)
                e2 = phase((float(p1 + p4) - root) / 2.0, t)
        else:
            root = math.sqrt(float(d))
            e1 = phase((float(p1 + p4) + root) / 2.0, t)
            e2 = phase((float(p1 + p4) - root) / 2.0, t)
        phi_w = (float(p4 - p1) + root) / (2.0 * float(p2))
        psi_w = (float(p4 - p1) - root) / (2.0 * float(p2))
        a1 = ck * float(p2) * (1.0 - psi_w) / root
        a2 = ck * float(p2) * (phi_w - 1.0) / root
        ks.append(k)
        u_modes.append(a1 * e1 + a2 * e2)
        v_modes.append(phi_w * a1 * e1 + psi_w * a2 * e2)
    u = evaluate_modes(np.array(ks, dtype=np.int64), np.array(u_modes), x_grid)
    v = evaluate_modes(np.array(ks, dtype=np.int64), np.array(v_modes), x_grid)
    return LinearSolutionSample(np.asarray(x_grid), u, v, N, t)


def solve_riemann_case2(
    quartet: DispersionQuartet, t: TimeLike, x_grid: np.ndarray, N: int
) -> LinearSolutionSample:
    """Step-data solution when Delta vanishes identically.

    Both components collapse onto u = v = sum c_k e^{i(kx - omega(k) t)}
    with omega(k) = -phi1(k) - phi2(k).
    """
    if not quartet.delta_poly_is_zero():
        raise ComplexBranchError("Delta does not vanish identically")
    # P = -omega = phi1 + phi2, evaluated exactly (vectorized mod 2q at
    # rational times).
    P = quartet.phi1 + quartet.phi2
    ks = np.array(
        [k for k in range(-N, N + 1) if riemann_coefficient(k) != 0], dtype=np.int64
    )
    cks = np.array([riemann_coefficient(int(k)) for k in ks])
    vals = cks * poly_phases(P, ks, t)
    u = evaluate_modes(ks, vals, x_grid)
    return LinearSolutionSample(np.asarray(x_grid), u, u.copy(), N, t)


def solve_linear_bv(
    quartet: DispersionQuartet,
    f_hat: FourierData,
    g_hat: FourierData,
    t: TimeLike,
    x_grid: np.ndarray,
) -> LinearSolutionSample:
    """General BV-data solution for a quartet passing the quantization check.

    With a1, a2 the integer roots and P_j = phi1 + a_j phi2:
      u = [a1 e^{iP2 t} - a2 e^{iP1 t}] f_hat/(a1-a2)
          + [e^{iP1 t} - e^{iP2 t}] g_hat/(a1-a2),
      v = a1 a2 [e^{iP2 t} - e^{iP1 t}] f_hat/(a1-a2)
          + [a1 e^{iP1 t} - a2 e^{iP2 t}] g_hat/(a1-a2).
    """
    verdict = quantization_check(quartet.phi1, quartet.phi2, quartet.phi3, quartet.phi4)
    if not verdict.satisfied:
        raise ValueError(f"quantization conditions not met: {verdict.failure_reason}")
    a1, a2 = verdict.a1, verdict.a2
    if a1 == a2:
        raise DegenerateBranchError("a1 = a2 (beta = -alpha^2/4) is unsupported")
    if f_hat.N != g_hat.N:
        raise ValueError("f and g must share the truncation order")
    N = f_hat.N
    ks = np.arange(-N, N + 1, dtype=np.int64)
    P1 = quartet.phi1 + quartet.phi2.scaled(a1)
    P2 = quartet.phi1 + quartet.phi2.scaled(a2)
    e1 = poly_phases(P1, ks, t)
    e2 = poly_phases(P2, ks, t)
    den = float(a1 - a2)
    fu = (a1 * e2 - a2 * e1) / den
    gu = (e1 - e2) / den
    fv = a1 * a2 * (e2 - e1) / den
    gv = (a1 * e1 - a2 * e2) / den
    u_modes = fu * f_hat.coeffs + gu * g_hat.coeffs
    v_modes = fv * f_hat.coeffs + gv * g_hat.coeffs
    u = evaluate_modes(ks, u_modes, x_grid)
    v = evaluate_modes(ks, v_modes, x_grid)
    return LinearSolutionSample(np.asarray(x_grid), u, v, N, t)


@dataclass
class CoupledLinearConstants:
    """The conserved scalars and derived per-run constants of the linear part."""

    norm_f_sq: float
    norm_g_sq: float
    inner_fg: complex  # <f, g> = int conj(f) g
    delta: float
    sqrt_delta: float
    omega_shift: float  # common constant -(3/4pi)(|f|^2+|g|^2) in omega

    @property
    def phi2(self) -> complex:
        return np.conj(self.inner_fg) / (2.0 * math.pi)  # <g, f>/2pi

    @property
    def phi4(self) -> complex:
        return self.inner_fg / (2.0 * math.pi)


def coupled_linear_constants(f_hat: FourierData, g_hat: FourierData) -> CoupledLinearConstants:
    nf = f_hat.norm_sq()
    ng = g_hat.norm_sq()
    ip = FourierData.inner(f_hat, g_hat)
    d = ((nf - ng) / (2.0 * math.pi)) ** 2 + abs(ip) ** 2 / math.pi ** 2
    if d < 0:
        if d > -1e-14:
            d = 0.0
        else:
            raise ValueError(f"negative discriminant {d}")
    return CoupledLinearConstants(
        norm_f_sq=nf,
        norm_g_sq=ng,
        inner_fg=ip,
        delta=d,
        sqrt_delta=math.sqrt(d),
        omega_shift=-(3.0 / (4.0 * math.pi)) * (nf + ng),
    )


def manakov_linear_part(
    f_hat: FourierData,
    g_hat: FourierData,
    t: TimeLike,
    x_grid: np.ndarray,
):
    """Explicit linear part (L^u, L^v) of the coupled cubic flow.

    Per mode the coefficient pair evolves by exp(iAt) with
      A = [[phi1, phi2], [phi4, phi3]],
      phi1 = -k^2 + |f|^2/pi + |g|^2/2pi,  phi2 = <g,f>/2pi,
      phi3 = -k^2 + |g|^2/pi + |f|^2/2pi,  phi4 = <f,g>/2pi,
    whose eigenvalues are -omega_{1,2} = k^2 - (3/4pi)(|f|^2+|g|^2)
    -/+ sqrt(Delta)/2 with the k-independent Delta of the conserved scalars.
    Written in spectral form:
      L^u_k = e^{-i omega2 t} f_k
              + (e^{-i omega1 t} - e^{-i omega2 t})
                [(phi1 + omega2) f_k + phi2 g_k] / (omega2 - omega1).
    """
    if f_hat.N != g_hat.N:
        raise ValueError("f and g must share the truncation order")
    N = f_hat.N
    consts = coupled_linear_constants(f_hat, g_hat)
    nf, ng = consts.norm_f_sq, consts.norm_g_sq
    root = consts.sqrt_delta
    ks = np.arange(-N, N + 1, dtype=float)
    ksq = ks * ks
    tt = time_value(t)
    omega1 = ksq + consts.omega_shift - root / 2.0
    omega2 = ksq + consts.omega_shift + root / 2.0
    e1 = np.exp(-1j * omega1 * tt)
    e2 = np.exp(-1j * omega2 * tt)
    phi1 = -ksq + nf / math.pi + ng / (2.0 * math.pi)
    phi3 = -ksq + ng / math.pi + nf / (2.0 * math.pi)
    fc, gc = f_hat.coeffs, g_hat.coeffs
    if root < 1e-14:
        # Diagonal limit: phi2 = phi4 = 0 and phi1 = phi3.
        lu_modes = np.exp(1j * phi1 * tt) * fc
        lv_modes = np.exp(1j * phi3 * tt) * gc
    else:
        lu_modes = e2 * fc + (e1 - e2) * ((phi1 + omega2) * fc + consts.phi2 * gc) / root
        lv_modes = e2 * gc + (e1 - e2) * ((phi3 + omega2) * gc + consts.phi4 * fc) / root
    ki = np.arange(-N, N + 1, dtype=np.int64)
    lu = evaluate_modes(ki, lu_modes, x_grid)
    lv = evaluate_modes(ki, lv_modes, x_grid)
    return lu, lv, consts
