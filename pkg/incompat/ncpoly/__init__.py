"""Projector words, polynomials in them, and their summation calculus."""

from incompat.ncpoly.parents import (
    MarginalAggregate,
    dump_classification,
    eta_exact,
    eta_g_lower,
    marginal_aggregate,
    normalisation,
)
from incompat.ncpoly.polynomial import NCPolynomial, expand_power_of_S, polynomial_in_S
from incompat.ncpoly.rewriting import MarginalResult, classify, is_normalisable, reduce_word, sigma, sigma_x
from incompat.ncpoly.word import Word, adjoint, canonical, is_palindrome, normalize

__all__ = [
    "MarginalAggregate",
    "MarginalResult",
    "NCPolynomial",
    "Word",
    "adjoint",
    "canonical",
    "classify",
    "dump_classification",
    "eta_exact",
    "eta_g_lower",
    "expand_power_of_S",
    "is_normalisable",
    "is_palindrome",
    "marginal_aggregate",
    "normalisation",
    "normalize",
    "polynomial_in_S",
    "reduce_word",
    "sigma",
    "sigma_x",
]
