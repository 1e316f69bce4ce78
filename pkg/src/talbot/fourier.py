"""Fourier-side plumbing shared by the closed-form solvers and analyses.

Conventions used throughout:
  u(x) = sum_k  c_k e^{ikx},      c_k = (1/2pi) int_0^{2pi} u e^{-ikx} dx,
  ||u||^2 = 2pi sum |c_k|^2,      <f, g> = int_0^{2pi} conj(f) g dx.

The grid is x_m = 2pi m / M, m = 0..M-1, M a power of two, matching the
time-domain solver so oracle comparisons are sample-for-sample.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .dispersion import IntegralPolynomial


@dataclass(frozen=True)
class RationalTime:
    """Exact time p*pi/q, kept as integers so phases can be reduced mod 2q."""

    p: int
    q: int

    def __post_init__(self):
        if self.q <= 0:
            raise ValueError("q must be a positive integer")
        g = math.gcd(self.p, self.q)
        if g > 1:
            object.__setattr__(self, "p", self.p // g)
            object.__setattr__(self, "q", self.q // g)

    @property
    def value(self) -> float:
        return math.pi * self.p / self.q

    def __float__(self) -> float:
        return self.value


TimeLike = Union[float, RationalTime]


def time_value(t: TimeLike) -> float:
    return t.value if isinstance(t, RationalTime) else float(t)


@dataclass
class FourierData:
    """Truncated coefficient table for modes -N..N (index k+N)."""

    coeffs: np.ndarray
    N: int

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=complex)
        if self.coeffs.shape != (2 * self.N + 1,):
            raise ValueError("coefficient array must have length 2N+1")

    def __getitem__(self, k: int) -> complex:
        if abs(k) > self.N:
            return 0.0 + 0.0j
        return complex(self.coeffs[k + self.N])

    def modes(self) -> np.ndarray:
        return np.arange(-self.N, self.N + 1)

    def norm_sq(self) -> float:
        return 2.0 * math.pi * float(np.sum(np.abs(self.coeffs) ** 2))

    @staticmethod
    def inner(f: "FourierData", g: "FourierData") -> complex:
        """<f, g> = int conj(f) g, conjugate-linear in the first slot."""
        n = min(f.N, g.N)
        fc = f.coeffs[f.N - n : f.N + n + 1]
        gc = g.coeffs[g.N - n : g.N + n + 1]
        return 2.0 * math.pi * complex(np.sum(np.conj(fc) * gc))

    @classmethod
    def from_dict(cls, table: dict, N: int | None = None) -> "FourierData":
        ks = [int(k) for k in table]
        if N is None:
            N = max(abs(k) for k in ks) if ks else 0
        coeffs = np.zeros(2 * N + 1, dtype=complex)
        for k, v in table.items():
            k = int(k)
            if abs(k) > N:
                raise ValueError(f"mode {k} outside truncation {N}")
            coeffs[k + N] = complex(v)
        return cls(coeffs, N)

    @classmethod
    def from_samples(cls, values: np.ndarray) -> "FourierData":
        """Coefficients of the trigonometric interpolant of uniform samples.

        M samples give modes -M/2..M/2-1; the unmatched -M/2 row is stored
        at k = -N and the +N slot left zero, which reproduces the samples
        exactly on the originating grid.
        """
        values = np.asarray(values, dtype=complex)
        M = len(values)
        if M & (M - 1):
            raise ValueError("sample count must be a power of two")
        c = np.fft.fft(values) / M
        N = M // 2
        coeffs = np.zeros(2 * N + 1, dtype=complex)
        coeffs[N : 2 * N] = c[: N]          # k = 0..N-1
        coeffs[: N] = c[N :]                # k = -N..-1
        return cls(coeffs, N)


def riemann_coefficient(k: int) -> complex:
    """Fourier coefficients of the unit step (0 on [0,pi), 1 on (pi,2pi))."""
    if k == 0:
        return 0.5 + 0.0j
    if k % 2 == 0:
        return 0.0 + 0.0j
    return 1j / (math.pi * k)


def grid(M: int) -> np.ndarray:
    return 2.0 * np.pi * np.arange(M) / M


def is_canonical_grid(x_grid: np.ndarray) -> bool:
    M = len(x_grid)
    if M == 0 or M & (M - 1):
        return False
    return np.allclose(x_grid, grid(M), rtol=0.0, atol=1e-12)


def evaluate_modes(ks: np.ndarray, values: np.ndarray, x_grid: np.ndarray) -> np.ndarray:
    """sum_j values[j] e^{i ks[j] x} on x_grid.

    On the canonical uniform grid the modes are folded mod M and evaluated
    with one inverse FFT (exact there, since e^{ikx} depends only on
    k mod M at the grid points).  Other grids fall back to direct summation.
    """
    ks = np.asarray(ks, dtype=np.int64)
    values = np.asarray(values, dtype=complex)
    if is_canonical_grid(x_grid):
        M = len(x_grid)
        folded = np.zeros(M, dtype=complex)
        np.add.at(folded, np.mod(ks, M), values)
        return M * np.fft.ifft(folded)
    out = np.zeros(len(x_grid), dtype=complex)
    for k, v in zip(ks, values):
        out += v * np.exp(1j * k * np.asarray(x_grid))
    return out


def phase(exponent_coeff, t: TimeLike) -> complex:
    """e^{i * exponent_coeff * t} with exact reduction at rational times.

    When t = p*pi/q and the coefficient is an integer, the angle is reduced
    mod 2pi in integer arithmetic first; this is what keeps cubic symbols
    (k^3 ~ 1e15) phase-accurate where float64 cannot.
    """
    if isinstance(t, RationalTime) and isinstance(exponent_coeff, (int, np.integer)):
        r = (int(exponent_coeff) * t.p) % (2 * t.q)
        return cmath.exp(1j * math.pi * r / t.q)
    return cmath.exp(1j * float(exponent_coeff) * time_value(t))


def poly_phases(P: IntegralPolynomial, ks: np.ndarray, t: TimeLike) -> np.ndarray:
    """e^{i P(k) t} for an integer array of modes.

    Rational t: Horner evaluation of P mod 2q (products stay inside int64
    for q up to ~1e9), then a table of 2q roots of unity.  Float t: plain
    float evaluation, accurate while |P(k) t| stays below ~2^52.
    """
    ks = np.asarray(ks, dtype=np.int64)
    if isinstance(t, RationalTime):
        m = 2 * t.q
        km = np.mod(ks, m)
        acc = np.zeros(len(ks), dtype=np.int64)
        for c in reversed(P.coeffs):
            acc = (acc * km + c % m) % m
        r = (acc * (t.p % m)) % m
        return np.exp(1j * math.pi * r / t.q)
    vals = np.zeros(len(ks), dtype=float)
    for c in reversed(P.coeffs):
        vals = vals * ks + c
    return np.exp(1j * vals * float(t))


# Named initial data -------------------------------------------------------

def step_samples(M: int) -> np.ndarray:
    """Unit step: 0 on [0,pi), 1 on (pi,2pi); jump nodes take the midpoint."""
    x = grid(M)
    s = np.where(x < np.pi, 0.0, 1.0)
    s[0] = 0.5
    s[M // 2] = 0.5
    return s.astype(complex)


def sigma1_samples(M: int) -> np.ndarray:
    """-1 on [0,pi), +1 on (pi,2pi); midpoint value 0 at the two jumps."""
    x = grid(M)
    s = np.where(x < np.pi, -1.0, 1.0)
    s[0] = 0.0
    s[M // 2] = 0.0
    return s.astype(complex)


def sigma2_samples(M: int) -> np.ndarray:
    return sigma1_samples(M) / 10.0


def ramp_samples(M: int) -> np.ndarray:
    """g(x) = x/10 for x in [-pi,pi), relabeled onto the [0,2pi) grid."""
    x = grid(M)
    xs = np.where(x < np.pi, x, x - 2.0 * np.pi)
    g = xs / 10.0
    g[M // 2] = 0.0  # jump of the periodic extension at x = pi
    return g.astype(complex)


NAMED_DATA = {
    "sigma": step_samples,
    "sigma1": sigma1_samples,
    "sigma2": sigma2_samples,
    "linear_ramp": ramp_samples,
}
