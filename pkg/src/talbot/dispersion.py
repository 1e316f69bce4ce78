"""Integer dispersion polynomials and the two-component branch structure.

The linear system couples two fields through four constant-coefficient
operators whose Fourier symbols are i*phi_j(k) with phi_j integer-coefficient
polynomials.  Everything downstream (branch frequencies, quantization checks,
exact rational-time phases) relies on evaluating these polynomials in exact
integer arithmetic, so this module never rounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Tuple

# Supported evaluation envelope: results must fit a signed 128-bit integer.
# The degree/|k| caps reject clearly out-of-range requests up front; the
# exact width check on the result below is what actually guarantees the bound.
MAX_DEGREE = 8
MAX_ABS_K = 2 ** 17
_INT_LIMIT = 2 ** 127


class PolynomialRangeError(OverflowError):
    """Evaluation outside the supported integer envelope."""


class ComplexBranchError(ValueError):
    """Delta(k) < 0 or degenerate: the two real branches do not exist."""


class WeightUndefinedError(ValueError):
    """phi2(k) = 0: the branch weights phi(k), psi(k) are undefined."""


@dataclass(frozen=True)
class IntegralPolynomial:
    """Polynomial with integer coefficients, stored low order first."""

    coeffs: Tuple[int, ...]

    def __init__(self, coeffs):
        cs = [int(c) for c in coeffs]
        while len(cs) > 1 and cs[-1] == 0:
            cs.pop()
        if not cs:
            cs = [0]
        object.__setattr__(self, "coeffs", tuple(cs))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return self.coeffs == (0,)

    def __call__(self, k: int) -> int:
        return eval_poly(self, k)

    def __add__(self, other: "IntegralPolynomial") -> "IntegralPolynomial":
        n = max(len(self.coeffs), len(other.coeffs))
        a = list(self.coeffs) + [0] * (n - len(self.coeffs))
        b = list(other.coeffs) + [0] * (n - len(other.coeffs))
        return IntegralPolynomial([x + y for x, y in zip(a, b)])

    def __sub__(self, other: "IntegralPolynomial") -> "IntegralPolynomial":
        return self + other.scaled(-1)

    def scaled(self, c: int) -> "IntegralPolynomial":
        return IntegralPolynomial([c * x for x in self.coeffs])

    def __mul__(self, other: "IntegralPolynomial") -> "IntegralPolynomial":
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return IntegralPolynomial(out)


def eval_poly(P: IntegralPolynomial, k: int) -> int:
    """Exact Horner evaluation of P at integer k.

    Raises PolynomialRangeError when the degree, |k| or the result leaves
    the supported 128-bit envelope; there is no silent wraparound because
    Python integers are unbounded, the cap is a contract.
    """
    k = int(k)
    if P.degree > MAX_DEGREE:
        raise PolynomialRangeError(f"degree {P.degree} exceeds {MAX_DEGREE}")
    if abs(k) > MAX_ABS_K:
        raise PolynomialRangeError(f"|k| = {abs(k)} exceeds {MAX_ABS_K}")
    acc = 0
    for c in reversed(P.coeffs):
        acc = acc * k + c
    if abs(acc) >= _INT_LIMIT:
        raise PolynomialRangeError(f"P({k}) = {acc} exceeds 128-bit range")
    return acc


@dataclass(frozen=True)
class Branches:
    omega1: float
    omega2: float
    phi_weight: float
    psi_weight: float


@dataclass(frozen=True)
class DispersionQuartet:
    """The four symbols phi_1..phi_4 plus optional real constant offsets.

    Offsets carry the data-dependent constants that arise when the symbols
    come from linearizing the coupled cubic system around its conserved
    quantities; they are excluded from all exact-integer paths.
    """

    phi1: IntegralPolynomial
    phi2: IntegralPolynomial
    phi3: IntegralPolynomial
    phi4: IntegralPolynomial
    offsets: Tuple[float, float, float, float] = (0.0, 0.0, 0.0, 0.0)

    def has_offsets(self) -> bool:
        return any(c != 0.0 for c in self.offsets)

    def symbol_values(self, k: int):
        """phi_j(k) including offsets; exact ints when offsets vanish."""
        vals = (self.phi1(k), self.phi2(k), self.phi3(k), self.phi4(k))
        if not self.has_offsets():
            return vals
        return tuple(v + c for v, c in zip(vals, self.offsets))

    def delta_poly_is_zero(self) -> bool:
        """Whether Delta vanishes identically as a polynomial (offset-free)."""
        if self.has_offsets():
            return False
        d = self.phi1 - self.phi4
        full = d * d + (self.phi2 * self.phi3).scaled(4)
        return full.is_zero()


def delta(quartet: DispersionQuartet, k: int):
    """Discriminant Delta(k) = (phi1-phi4)^2 + 4 phi2 phi3 at mode k.

    Exact integer when the quartet has no constant offsets, float otherwise.
    """
    p1, p2, p3, p4 = quartet.symbol_values(k)
    return (p1 - p4) ** 2 + 4 * p2 * p3


def branches(quartet: DispersionQuartet, k: int) -> Branches:
    """Branch frequencies omega1 <= omega2 and the weights phi(k), psi(k).

    omega_{1,2} = -(phi1 + phi4 -/+ sqrt(Delta))/2, and the weights divide
    by 2 phi2(k); modes where phi2 vanishes must go through the degenerate
    path of the solvers instead.
    """
    p1, p2, p3, p4 = quartet.symbol_values(k)
    d = (p1 - p4) ** 2 + 4 * p2 * p3
    if d <= 0:
        raise ComplexBranchError(f"Delta({k}) = {d} is not positive")
    root = math.sqrt(float(d))
    omega1 = -(float(p1 + p4) + root) / 2.0
    omega2 = -(float(p1 + p4) - root) / 2.0
    if p2 == 0:
        raise WeightUndefinedError(f"phi2({k}) = 0, branch weights undefined")
    phi_w = (float(p4 - p1) + root) / (2.0 * float(p2))
    psi_w = (float(p4 - p1) - root) / (2.0 * float(p2))
    return Branches(omega1, omega2, phi_w, psi_w)


@dataclass(frozen=True)
class QuantizationVerdict:
    satisfied: bool
    a1: Optional[int] = None
    a2: Optional[int] = None
    alpha: Optional[Fraction] = None
    beta: Optional[Fraction] = None
    failure_reason: Optional[str] = None  # non_integer_root |
    # negative_discriminant | phi_relation_violated


def _exact_ratio(num: IntegralPolynomial, den: IntegralPolynomial):
    """num = r * den for a single rational r, or None if no such r exists."""
    if den.is_zero():
        return Fraction(0) if num.is_zero() else None
    n = max(len(num.coeffs), len(den.coeffs))
    a = list(num.coeffs) + [0] * (n - len(num.coeffs))
    b = list(den.coeffs) + [0] * (n - len(den.coeffs))
    r = None
    for x, y in zip(a, b):
        if y == 0:
            if x != 0:
                return None
            continue
        rr = Fraction(x, y)
        if r is None:
            r = rr
        elif r != rr:
            return None
    return Fraction(0) if r is None else r


def quantization_check(
    phi1: IntegralPolynomial,
    phi2: IntegralPolynomial,
    phi3: IntegralPolynomial,
    phi4: IntegralPolynomial,
) -> QuantizationVerdict:
    """Decide whether the quartet supports rational-time quantization.

    Requires phi4 = phi1 + alpha*phi2 and phi3 = beta*phi2 as exact
    polynomial identities (alpha, beta rational via coefficient ratios),
    and both roots (alpha +/- sqrt(alpha^2+4 beta))/2 to be integers.
    """
    alpha = _exact_ratio(phi4 - phi1, phi2)
    beta = _exact_ratio(phi3, phi2)
    if alpha is None or beta is None:
        return QuantizationVerdict(False, failure_reason="phi_relation_violated")
    disc = alpha * alpha + 4 * beta
    if disc < 0:
        return QuantizationVerdict(
            False, alpha=alpha, beta=beta, failure_reason="negative_discriminant"
        )
    # Roots are integers iff disc is a perfect square of a rational with the
    # right parity; check exactly with integer arithmetic.
    if disc.denominator != 1:
        return QuantizationVerdict(
            False, alpha=alpha, beta=beta, failure_reason="non_integer_root"
        )
    s = math.isqrt(disc.numerator)
    if s * s != disc.numerator:
        return QuantizationVerdict(
            False, alpha=alpha, beta=beta, failure_reason="non_integer_root"
        )
    r1 = (alpha + s) / 2
    r2 = (alpha - s) / 2
    if r1.denominator != 1 or r2.denominator != 1:
        return QuantizationVerdict(
            False, alpha=alpha, beta=beta, failure_reason="non_integer_root"
        )
    a1, a2 = int(r1), int(r2)
    return QuantizationVerdict(True, a1=a1, a2=a2, alpha=alpha, beta=beta)
