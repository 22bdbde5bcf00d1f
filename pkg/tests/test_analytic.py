"""
Tests for incompat.analytic: closed-form parents, the steering robustness
bound with its dimension witness, and the optimised degree-4 MUB parent.
"""

import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from incompat.analytic import (
    alpha,
    anticommuting_values,
    beta,
    degree2_bound,
    degree2_transferred,
    degree2_value,
    degree3_bound,
    degree3_value,
    dimension_witness,
    monomial_bounds,
    mub_degree4_bound,
    mub_moments,
    sr_bound,
    sr_from_eta,
    summary_rows,
    transfer_to_g,
)
from incompat.errors import UnboundedWitnessError

TABLE_II_CELLS = [
    (2, 2), (2, 3), (2, 4), (2, 5), (2, 6),
    (3, 2), (3, 3), (3, 4), (3, 5), (3, 6),
    (4, 3), (4, 4), (4, 5), (4, 6),
    (5, 4), (5, 5), (5, 6),
    (6, 5), (6, 6),
    (7, 6),
]  # fmt: skip

pairs = st.tuples(st.integers(min_value=2, max_value=8), st.integers(min_value=2, max_value=8))


# ---------------------------------------------------------------------------
# Degree-2 and degree-3 parents
# ---------------------------------------------------------------------------


def test_parent_parameters():
    assert alpha(1, 4) == pytest.approx(0.0, abs=1e-15)
    assert alpha(5, 4) == pytest.approx(0.5)
    assert beta(5, 4) == pytest.approx((7 - math.sqrt(13)) / 4)


def test_degree2_values():
    assert degree2_value(2, 2) == pytest.approx(1 / math.sqrt(2))
    assert degree2_value(2, 3) == pytest.approx((1 + math.sqrt(17)) / 8)
    assert degree2_value(5, 4) == pytest.approx(1 / 3)
    assert degree2_bound(5, 4).params["alpha"] == pytest.approx(0.5)


def test_degree2_rejects_generalised_measure():
    with pytest.raises(ValueError):
        degree2_bound(3, 3, measure="g")


def test_degree3_values():
    assert degree3_value(2, 2) == pytest.approx(0.853553, abs=1e-6)
    assert degree3_value(3, 2) == pytest.approx((1 + 1 / math.sqrt(3)) / 2)
    assert degree3_bound(5, 4).value == pytest.approx((7 + math.sqrt(13)) / 20)


def test_transfer():
    assert transfer_to_g(1 / 3, 4) == pytest.approx(0.5)
    assert degree2_transferred(5, 4).value == pytest.approx(0.5)
    with pytest.raises(ValueError):
        transfer_to_g(0.5, 0)


@pytest.mark.parametrize("k", range(2, 10))
@pytest.mark.parametrize("m", range(2, 10))
def test_degree3_dominates_transferred_degree2(k, m):
    assert degree3_value(k, m) >= degree2_transferred(k, m).value - 1e-12


def test_invalid_arguments():
    with pytest.raises(ValueError):
        degree3_value(2, 1)
    with pytest.raises(ValueError):
        alpha(0, 3)


# ---------------------------------------------------------------------------
# Anticommuting observables
# ---------------------------------------------------------------------------


def test_anticommuting_values():
    assert anticommuting_values(4) == pytest.approx({"r": 0.5, "g": 0.75, "p": 0.5, "jm": 2 / 3})
    assert anticommuting_values(1) == pytest.approx({"r": 1.0, "g": 1.0, "p": 1.0, "jm": 1.0})
    with pytest.raises(ValueError):
        anticommuting_values(0)


# ---------------------------------------------------------------------------
# Steering robustness and dimension witness
# ---------------------------------------------------------------------------


def test_sr_bound_values():
    assert sr_bound(2, 2) == pytest.approx(0.1716, abs=5e-5)
    assert sr_bound(4, 4) == pytest.approx(0.7463, abs=5e-5)
    assert sr_bound(3, 4) == pytest.approx(0.5695, abs=5e-5)
    assert sr_from_eta(0.5) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        sr_from_eta(0.0)


@settings(max_examples=49)
@given(pairs)
def test_sr_bound_is_symmetric(kd):
    k, d = kd
    assert sr_bound(k, d) == pytest.approx(sr_bound(d, k), abs=1e-12), f"sr_bound({k},{d}) != sr_bound({d},{k})"


@settings(max_examples=49)
@given(pairs)
def test_sr_bound_agrees_with_degree3(kd):
    k, d = kd
    assert sr_from_eta(degree3_value(k, d)) == pytest.approx(sr_bound(k, d), abs=1e-12)


@pytest.mark.parametrize("k", range(2, 9))
@pytest.mark.parametrize("d", range(2, 7))
def test_witness_inverts_sr_bound(k, d):
    assert dimension_witness(sr_bound(k, d), k) == pytest.approx(d, abs=1e-9)


def test_witness_examples():
    assert dimension_witness(0.0, 2) == pytest.approx(1.0)
    assert dimension_witness(0.4432, 3) == pytest.approx(3.0, abs=1e-3)


def test_witness_out_of_range():
    with pytest.raises(UnboundedWitnessError, match="no finite dimension"):
        dimension_witness(2.9, 3)
    with pytest.raises(ValueError):
        dimension_witness(-0.1, 3)
    with pytest.raises(ValueError):
        dimension_witness(0.1, 1)


# ---------------------------------------------------------------------------
# Unbiased bases
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("k", range(2, 7))
@pytest.mark.parametrize("d", range(2, 10))
def test_moments_sum_to_normalisation(k, d):
    for p in range(5):
        P, I, N = mub_moments(k, d, p)
        assert P + d * I == N, f"S^{p} for k={k}, d={d}"
        assert isinstance(N, Fraction)


def test_moments_of_two_qubit_bases():
    # two rank-one projectors with overlap 1/2: tr sum_j S^4 = d^2 ((1+c)^4 + (1-c)^4), c^2 = 1/d
    P, I, N = mub_moments(2, 2, 4)
    assert N == 2 * (2 + 6 + Fraction(1, 2))
    assert (P, I) == (2 + 9 + 1, 1 + Fraction(3, 2))


def test_moments_beyond_degree_four():
    with pytest.raises(ValueError):
        mub_moments(2, 2, 5)


def test_monomial_S_gives_one_over_k():
    assert monomial_bounds(3, 4)[1] == pytest.approx(1 / 3)


@pytest.mark.parametrize("k,d", TABLE_II_CELLS)
def test_degree4_dominates_monomials(k, d):
    result = mub_degree4_bound(k, d)
    assert result.value >= max(result.params["monomial"].values()) - 1e-12
    assert result.params["gamma"][0] <= result.params["gamma"][1]


def test_degree4_optimum_for_five_bases_in_four():
    result = mub_degree4_bound(5, 4)
    g1, g2 = result.params["gamma"]
    assert g1 == pytest.approx((3 - math.sqrt(6)) / 2, abs=1e-4)
    assert g2 == pytest.approx(1.25, abs=1e-4)
    assert transfer_to_g(result.value, 4) == pytest.approx(0.5449, abs=1e-4)
    # monic quartic with the optimal double roots
    assert result.params["coefficients"][-1] == pytest.approx(1.0)


def test_degree4_qubits_reach_depolarising_value():
    assert mub_degree4_bound(2, 2).value == pytest.approx(1 / math.sqrt(2), abs=5e-5)


def test_summary_rows_for_five_bases():
    rows = {r.construction: r.value for r in summary_rows(5, 4)}
    assert rows == pytest.approx({"cloning": 0.52, "deg2": 0.5, "deg3": 0.5303, "deg4_mub": 0.5449}, abs=1e-4)
