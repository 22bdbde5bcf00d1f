"""
Noise levels certified by polynomial parent measurements.

A parent G_j = poly(P_{j_1|1}, ..., P_{j_k|k}) has normalisation
N = sum_j G_j (a multiple of the identity) and marginals
sum_j delta(j_x, a) G_j = C_P P_a|x + C_id 1.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction

from incompat.errors import (
    AsymmetricMarginalError,
    InexactMarginalError,
    NegativeIdentityResidueError,
    NegativePinchCoefficientError,
    NotMarginalisableError,
    NotNormalisableError,
    PolynomialError,
)
from incompat.ncpoly.polynomial import Coeff, NCPolynomial
from incompat.ncpoly.rewriting import Mode, classify, sigma, sigma_x
from incompat.ncpoly.word import Word, format_word

logger = logging.getLogger(__name__)

FLOAT_TOL = 1e-12


@dataclass(frozen=True)
class MarginalAggregate:
    x: int
    cP: Coeff
    cId: Coeff
    pinched: tuple[Word, ...] = ()


def _check_alphabet(poly: NCPolynomial, k: int) -> None:
    if poly.k != k:
        raise ValueError(f"polynomial is over {poly.k} letters, not {k}")


def _is_negative(value: Coeff, scale: float) -> bool:
    if isinstance(value, Fraction):
        return value < 0
    return value < -FLOAT_TOL * max(1.0, scale)


def normalisation(poly: NCPolynomial, m: int, mode: Mode = "generic") -> Coeff:
    total: Coeff = Fraction(0)
    for w, c in poly.items():
        s = sigma(w, poly.k, m, mode)
        if s is None:
            raise NotNormalisableError(f"monomial {format_word(w)} is not normalisable ({mode} mode)")
        total += c * s
    return total


def marginal_aggregate(poly: NCPolynomial, x: int, m: int, mode: Mode = "generic") -> MarginalAggregate:
    cP: Coeff = Fraction(0)
    cId: Coeff = Fraction(0)
    pinched = []
    for w, c in poly.items():
        res = sigma_x(w, x, poly.k, m, mode)
        if res is None:
            raise NotMarginalisableError(f"monomial {format_word(w)} has no marginal along {x} ({mode} mode)")
        if res.used_pinch:
            pinched.append(w)
        cP += c * res.cP
        cId += c * res.cId
    return MarginalAggregate(x, cP, cId, tuple(pinched))


def eta_exact(poly: NCPolynomial, k: int, m: int, mode: Mode = "mub") -> Coeff:
    """Noise level eta with marginals proportional to eta P + (1 - eta) 1/m."""
    _check_alphabet(poly, k)
    aggregates = [marginal_aggregate(poly, x, m, mode) for x in range(1, k + 1)]
    for agg in aggregates:
        if agg.pinched:
            raise InexactMarginalError(
                f"marginal along {agg.x} needs the pinching bound on "
                f"{', '.join(format_word(w) for w in agg.pinched)}; use eta_g_lower"
            )
    first = aggregates[0]
    scale = abs(float(first.cP)) + abs(float(first.cId))
    for agg in aggregates[1:]:
        if abs(float(agg.cP - first.cP)) > FLOAT_TOL * max(1.0, scale) or abs(
            float(agg.cId - first.cId)
        ) > FLOAT_TOL * max(1.0, scale):
            raise AsymmetricMarginalError(f"marginals along 1 and {agg.x} differ")
    if first.cP == 0:
        return Fraction(0)
    return first.cP / (first.cP + m * first.cId)


def eta_g_lower(poly: NCPolynomial, k: int, m: int, mode: Mode = "generic") -> Coeff:
    """Lower bound on eta^g: min_x (C_P + C_id)/N, folding the identity with 1 >= P."""
    _check_alphabet(poly, k)
    norm = normalisation(poly, m, mode)
    if not norm > 0:
        raise PolynomialError(f"normalisation {norm} is not positive")
    values = []
    for x in range(1, k + 1):
        agg = marginal_aggregate(poly, x, m, mode)
        negative = [w for w in agg.pinched if poly[w] < 0]
        if negative:
            raise NegativePinchCoefficientError(
                f"pinch-flagged monomials with negative coefficient: {', '.join(format_word(w) for w in negative)}"
            )
        if _is_negative(agg.cId, abs(float(agg.cP))):
            raise NegativeIdentityResidueError(f"identity residue {agg.cId} along {x} is negative")
        values.append((agg.cP + agg.cId) / norm)
    logger.debug("eta_g_lower per marginal: %s", [float(v) for v in values])
    return min(values)


def dump_classification(poly: NCPolynomial, k: int, m: int, mode: Mode = "generic") -> str:
    """One line per monomial: word ; coeff ; normalisable ; [marginal flags]."""
    _check_alphabet(poly, k)
    lines = []
    for w, c in poly.items():
        s, marginals = classify(w, poly.k, m, mode)
        flags = []
        for x, res in enumerate(marginals, start=1):
            if res is None:
                flags.append(f"{x}:none")
            else:
                kind = "P" if res.cP else "1"
                flags.append(f"{x}:{kind}={res.cP or res.cId}{'*' if res.used_pinch else ''}")
        lines.append(f"{format_word(w)} ; {c} ; {s is not None} ; [{' '.join(flags)}]")
    return "\n".join(lines)
