"""
Tests for incompat.ncpoly: word normal forms, the summation calculus and the
noise levels certified by polynomial parents.
"""

import math
from fractions import Fraction

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from incompat.analytic import alpha, beta, degree2_value, degree3_value, mub_moments
from incompat.errors import (
    AsymmetricMarginalError,
    InexactMarginalError,
    NegativeIdentityResidueError,
    NegativePinchCoefficientError,
    NotMarginalisableError,
    NotNormalisableError,
)
from incompat.ncpoly import (
    NCPolynomial,
    adjoint,
    canonical,
    dump_classification,
    eta_exact,
    eta_g_lower,
    expand_power_of_S,
    is_normalisable,
    is_palindrome,
    marginal_aggregate,
    normalisation,
    normalize,
    polynomial_in_S,
    sigma,
    sigma_x,
)


@st.composite
def normal_words(draw, max_k: int = 4, max_len: int = 7):
    k = draw(st.integers(min_value=2, max_value=max_k))
    letters = draw(st.lists(st.integers(min_value=1, max_value=k), max_size=max_len))
    return k, normalize(letters)


# ---------------------------------------------------------------------------
# Words
# ---------------------------------------------------------------------------


def test_normalize_merges_adjacent_repeats():
    assert normalize([1, 1, 2, 2, 2, 1, 3, 3]) == (1, 2, 1, 3)
    assert normalize([]) == ()


def test_canonical_is_shared_with_adjoint():
    assert canonical((3, 1, 2)) == canonical((2, 1, 3)) == (2, 1, 3)


def test_letters_outside_alphabet():
    with pytest.raises(ValueError):
        sigma((1, 4), 3, 2)


@settings(max_examples=200)
@given(normal_words())
def test_adjoint_palindrome_is_palindromic(kw):
    _, w = kw
    doubled = normalize(adjoint(w) + w)
    assert is_palindrome(doubled), f"{doubled} is not a palindrome"


# ---------------------------------------------------------------------------
# Summation calculus
# ---------------------------------------------------------------------------


def test_sigma_of_simple_words():
    assert sigma((), 3, 4) == 64
    assert sigma((1,), 3, 4) == 16
    assert sigma((1, 2, 1), 3, 4) == 4
    assert sigma((1, 2, 1, 2), 3, 4) is None
    assert isinstance(sigma((1,), 3, 4), Fraction)


def test_normalisability():
    assert is_normalisable((1, 2, 3, 2, 1), 3)
    assert not is_normalisable((1, 2, 1, 2), 2)
    assert not is_normalisable((1, 2, 3, 1, 2, 3), 3)


def test_marginals_of_short_words():
    # (1, 2, 1) along 1: sum over j_2 leaves P_1 P_1 = P_1
    res = sigma_x((1, 2, 1), 1, 2, 3)
    assert (res.cP, res.cId, res.exact) == (1, 0, True)
    assert sigma_x((1,), 1, 2, 3).cP == 3
    res = sigma_x((1, 2, 1), 2, 2, 3)
    assert (res.cP, res.cId, res.used_pinch) == (Fraction(1, 3), 0, True)
    res = sigma_x((1, 2), 2, 3, 5)
    assert (res.cP, res.cId, res.exact) == (5, 0, True)
    res = sigma_x((1,), 2, 3, 5)
    assert (res.cP, res.cId) == (0, 5)


def test_unbiased_collapse_is_exact():
    res = sigma_x((1, 2, 1), 2, 2, 3, mode="mub")
    assert res.exact
    assert (res.cP, res.cId) == (0, Fraction(1, 3))
    assert sigma((1, 2, 1, 2), 2, 3, mode="mub") == Fraction(1, 3)


def test_unknown_mode():
    with pytest.raises(ValueError, match="mode"):
        sigma((1,), 2, 2, mode="other")


@settings(max_examples=300)
@given(normal_words(), st.integers(min_value=2, max_value=6), st.sampled_from(["generic", "mub"]))
def test_sums_are_adjoint_symmetric(kw, m, mode):
    k, w = kw
    assert sigma(w, k, m, mode) == sigma(adjoint(w), k, m, mode)
    for x in range(1, k + 1):
        assert sigma_x(w, x, k, m, mode) == sigma_x(adjoint(w), x, k, m, mode), f"marginal {x} of {w}"


@settings(max_examples=300)
@given(normal_words(), st.integers(min_value=2, max_value=6))
def test_marginal_sums_to_normalisation_when_exact(kw, m):
    k, w = kw
    total = sigma(w, k, m)
    assume(total is not None)
    for x in range(1, k + 1):
        res = sigma_x(w, x, k, m)
        if res is None or res.used_pinch:
            continue
        # summing the remaining index: sum_a P_a = 1, sum_a 1 = m
        assert res.cP + m * res.cId == total, f"marginal {x} of {w} does not sum to {total}"


# ---------------------------------------------------------------------------
# Powers of S
# ---------------------------------------------------------------------------


def test_expansion_sizes():
    assert len(expand_power_of_S(3, 1)) == 3
    assert len(expand_power_of_S(3, 2)) == 3 + 6
    assert expand_power_of_S(2, 0) == NCPolynomial.constant(1, 2)
    with pytest.raises(ValueError):
        expand_power_of_S(2, 5)


def test_polynomial_in_S_matches_arithmetic():
    S = NCPolynomial.S(3)
    assert polynomial_in_S([2, -3, 1], 3) == S * S - 3 * S + 2


@pytest.mark.parametrize("k", [2, 3, 4, 5])
@pytest.mark.parametrize("m", [2, 3, 5])
def test_generic_low_moments(k, m):
    s1, s2 = expand_power_of_S(k, 1), expand_power_of_S(k, 2)
    assert normalisation(s1, m) == k * m ** (k - 1)
    assert normalisation(s2, m) == k * (m + k - 1) * Fraction(m) ** (k - 2)
    agg = marginal_aggregate(s2, 1, m)
    assert agg.cP == (m + 2 * (k - 1)) * Fraction(m) ** (k - 2)
    assert agg.cId == (k - 1) * (m + k - 2) * Fraction(m) ** (k - 3)
    assert agg.pinched == ()


@pytest.mark.parametrize("k", [2, 3, 4, 5])
@pytest.mark.parametrize("m", [2, 3, 4])
def test_generic_and_unbiased_cubes_differ_by_pinched_words(k, m):
    cube = expand_power_of_S(k, 3)
    generic = marginal_aggregate(cube, 1, m, "generic")
    unbiased = marginal_aggregate(cube, 1, m, "mub")
    assert normalisation(cube, m, "generic") == normalisation(cube, m, "mub")
    assert all(len(set(w)) == 2 and w[0] == w[2] for w in generic.pinched)
    assert generic.cP + generic.cId == unbiased.cP + unbiased.cId
    assert unbiased.cId - generic.cId == (k - 1) * Fraction(m) ** (k - 3)


@pytest.mark.parametrize("k", [2, 3, 4, 5, 6])
@pytest.mark.parametrize("m", [2, 3, 4, 5, 6, 7, 8, 9])
def test_unbiased_moments_match_closed_forms(k, m):
    for p in range(5):
        poly = expand_power_of_S(k, p)
        P, I, N = mub_moments(k, m, p)
        agg = marginal_aggregate(poly, 1, m, "mub")
        assert (agg.cP, agg.cId) == (P, I), f"S^{p} marginal for k={k}, d={m}"
        assert normalisation(poly, m, "mub") == N, f"S^{p} normalisation for k={k}, d={m}"


# ---------------------------------------------------------------------------
# Parents
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("k", [2, 3, 4, 5])
def test_eta_of_S_for_unbiased_bases(k):
    assert eta_exact(NCPolynomial.S(k), k, 3) == Fraction(1, k)


def test_identity_parent_certifies_nothing():
    assert eta_exact(NCPolynomial.constant(1, 3), 3, 2) == 0


@pytest.mark.parametrize("k", [2, 3, 4, 5, 6])
@pytest.mark.parametrize("m", [2, 3, 4, 5, 6])
def test_degree2_parent(k, m):
    S = NCPolynomial.S(k)
    parent = (S - float(alpha(k, m))) ** 2
    assert float(eta_exact(parent, k, m, "generic")) == pytest.approx(degree2_value(k, m), abs=1e-9)


@pytest.mark.parametrize("k", [2, 3, 4, 5, 6])
@pytest.mark.parametrize("m", [2, 3, 4, 5, 6])
def test_degree3_parent(k, m):
    S = NCPolynomial.S(k)
    parent = S * (S - float(beta(k, m))) ** 2
    assert float(eta_g_lower(parent, k, m)) == pytest.approx(degree3_value(k, m), abs=1e-12)


def test_degree2_value_for_qubits():
    S = NCPolynomial.S(2)
    parent = (S - float(alpha(2, 2))) ** 2
    assert float(eta_exact(parent, 2, 2, "generic")) == pytest.approx(1 / math.sqrt(2), abs=1e-12)


def test_pinched_marginal_needs_lower_bound():
    with pytest.raises(InexactMarginalError):
        eta_exact(expand_power_of_S(3, 3), 3, 3, "generic")


def test_single_letter_is_asymmetric():
    with pytest.raises(AsymmetricMarginalError):
        eta_exact(NCPolynomial.letter(1, 2), 2, 2)


def test_negative_pinched_coefficient():
    poly = NCPolynomial({(1, 2, 1): -1, (): 10}, 2)
    with pytest.raises(NegativePinchCoefficientError, match=r"\[1,2,1\]"):
        eta_g_lower(poly, 2, 2)


def test_negative_identity_residue():
    poly = NCPolynomial.letter(1, 2) - Fraction(1, 4)
    assert normalisation(poly, 2) == 1
    with pytest.raises(NegativeIdentityResidueError):
        eta_g_lower(poly, 2, 2)


def test_not_normalisable_parent():
    with pytest.raises(NotNormalisableError):
        eta_g_lower(NCPolynomial({(1, 2, 1, 2): 1}, 2), 2, 2)


def test_not_marginalisable_monomial():
    with pytest.raises(NotMarginalisableError):
        marginal_aggregate(NCPolynomial({(1, 2, 1, 2): 1}, 2), 1, 2)


def test_alphabet_mismatch():
    with pytest.raises(ValueError, match="letters"):
        eta_exact(NCPolynomial.S(2), 3, 2)


def test_classification_dump():
    dump = dump_classification(expand_power_of_S(2, 3), 2, 2)
    lines = dump.splitlines()
    assert len(lines) == len(expand_power_of_S(2, 3))
    pinched = next(line for line in lines if line.startswith("[1,2,1] "))
    assert pinched.split(" ; ")[2] == "True"
    assert "2:P=" in pinched and "*" in pinched
