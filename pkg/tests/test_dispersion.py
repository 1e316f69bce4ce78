import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from talbot.dispersion import (
    ComplexBranchError,
    DispersionQuartet,
    IntegralPolynomial,
    PolynomialRangeError,
    WeightUndefinedError,
    branches,
    delta,
    eval_poly,
    quantization_check,
)


def P(*coeffs):
    return IntegralPolynomial(coeffs)


def test_eval_poly_basic():
    assert eval_poly(P(0, 0, 1), 3) == 9
    assert eval_poly(P(0), 10 ** 6 // 100) == 0
    assert eval_poly(P(0, -1, 0, 1), -2) == -6


def test_eval_poly_zero_poly_large_k():
    # degree-0 zero polynomial evaluates anywhere inside the k envelope
    assert eval_poly(P(0), 2 ** 17) == 0


def test_eval_poly_rejects_out_of_range():
    with pytest.raises(PolynomialRangeError):
        eval_poly(P(*([1] * 10)), 2)
    with pytest.raises(PolynomialRangeError):
        eval_poly(P(0, 1), 2 ** 18)
    with pytest.raises(PolynomialRangeError):
        # k^8 at the k cap exceeds 128 bits
        eval_poly(P(*([0] * 8 + [1])), 2 ** 17)


def test_degree_normalization():
    assert P(1, 2, 0, 0).degree == 1
    assert P(0).degree == 0
    assert P(0, 0, 0).coeffs == (0,)


def test_delta_examples():
    quartet = DispersionQuartet(P(0, 1), P(0, 3), P(0), P(0, 1))
    assert delta(quartet, 5) == 0
    pattern = DispersionQuartet(P(0, 0, -1), P(0, 0, 1), P(0, 0, 2), P(0))
    assert delta(pattern, 1) == 9


def test_delta_with_offsets_matches_coupled_constants():
    # Matched data with |f|^2 = |g|^2 = 2pi and <f,g> = 2pi: the symbols are
    # -k^2 + 3 and coupling constants 1, so Delta = 4 for every k.
    quartet = DispersionQuartet(
        P(0, 0, -1), P(0), P(0), P(0, 0, -1), offsets=(3.0, 1.0, 1.0, 3.0)
    )
    for k in (-4, 0, 1, 17):
        assert delta(quartet, k) == pytest.approx(4.0)


def test_branches_symmetric_system():
    quartet = DispersionQuartet(P(0), P(1), P(1), P(0))
    b = branches(quartet, 3)
    assert b.omega1 == -1 and b.omega2 == 1
    assert b.phi_weight == 1 and b.psi_weight == -1


def test_branches_pattern_example():
    quartet = DispersionQuartet(P(0, 0, 0, -1), P(0, 0, 0, 1), P(0, 0, 0, 2), P(0))
    b = branches(quartet, 1)
    assert b.omega1 == -1 and b.omega2 == 2
    assert b.phi_weight == 2 and b.psi_weight == -1


def test_branches_errors():
    degenerate = DispersionQuartet(P(0, 1), P(0), P(0), P(0, 1))
    with pytest.raises(ComplexBranchError):
        branches(degenerate, 2)
    # Delta > 0 but phi2 = 0 at the probed mode
    decoupled = DispersionQuartet(P(0, 1), P(0), P(0), P(0, 3))
    with pytest.raises(WeightUndefinedError):
        branches(decoupled, 1)


@given(st.integers(-200, 200))
def test_branch_identities(k):
    quartet = DispersionQuartet(P(0, 0, -1), P(0, 0, 1), P(0, 0, 2), P(0))
    if delta(quartet, k) <= 0 or quartet.phi2(k) == 0:
        return
    b = branches(quartet, k)
    p1, p4 = quartet.phi1(k), quartet.phi4(k)
    assert b.omega1 + b.omega2 == pytest.approx(-(p1 + p4))
    assert (b.omega2 - b.omega1) ** 2 == pytest.approx(delta(quartet, k), rel=1e-12)
    assert b.omega1 <= b.omega2
    assert b.phi_weight != b.psi_weight


def test_quantization_examples():
    v = quantization_check(P(0, 0, 0, -1), P(0, 0, 0, 1), P(0, 0, 0, 2), P(0))
    assert v.satisfied and v.a1 == 2 and v.a2 == -1
    v = quantization_check(P(0, 0, 0, -1), P(0, 0, 0, 1), P(0, 0, 0, 2), P(0, 0, 0, -1))
    assert not v.satisfied and v.failure_reason == "non_integer_root"
    v = quantization_check(P(0, 0, -1), P(0, 0, 1), P(0, 0, 1), P(0, 0, -1))
    assert v.satisfied and v.a1 == 1 and v.a2 == -1


def test_quantization_relation_violated():
    # phi2 identically zero with nonzero phi3
    v = quantization_check(P(0, 0, -1), P(0), P(0, 0, 1), P(0, 0, -1))
    assert not v.satisfied and v.failure_reason == "phi_relation_violated"
    # phi4 - phi1 not proportional to phi2
    v = quantization_check(P(0, 0, -1), P(0, 0, 1), P(0, 0, 1), P(0, 1))
    assert not v.satisfied and v.failure_reason == "phi_relation_violated"


def test_quantization_negative_discriminant():
    v = quantization_check(P(0, 0, -1), P(0, 0, 1), P(0, 0, -5), P(0, 0, -1))
    assert not v.satisfied and v.failure_reason == "negative_discriminant"


def test_quantization_exhaustive_sweep():
    phi1, phi2 = P(0, 0, -1), P(0, 0, 1)
    for alpha in range(-10, 11):
        for beta in range(-10, 11):
            v = quantization_check(
                phi1, phi2, phi2.scaled(beta), phi1 + phi2.scaled(alpha)
            )
            disc = alpha * alpha + 4 * beta
            if disc < 0:
                expected = False
            else:
                s = math.isqrt(disc)
                expected = s * s == disc and (alpha + s) % 2 == 0
            assert v.satisfied == expected, (alpha, beta)
            if v.satisfied:
                assert v.a1 + v.a2 == alpha
                assert v.a1 * v.a2 == -beta


@settings(max_examples=50)
@given(st.integers(-30, 30), st.integers(-30, 30))
def test_quantization_root_identities(a1, a2):
    # Build a quartet from prescribed roots; the check must recover them.
    alpha, beta = a1 + a2, -a1 * a2
    phi1, phi2 = P(0, 0, 0, -1), P(0, 0, 0, 1)
    v = quantization_check(phi1, phi2, phi2.scaled(beta), phi1 + phi2.scaled(alpha))
    assert v.satisfied
    assert {v.a1, v.a2} == {a1, a2}
