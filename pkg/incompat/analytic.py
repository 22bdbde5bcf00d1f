"""
Closed-form incompatibility bounds.

Every bound is universal for k measurements with m outcomes (or rank-one in
dimension m = d), except the ``mub_*`` helpers which assume k unbiased bases.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

import numpy as np
from scipy.optimize import minimize

from incompat.errors import UnboundedWitnessError

logger = logging.getLogger(__name__)

CLONING_BOUND_5_4 = 13 / 25
GRID_POINTS = 200
POLISH_TOL = 1e-10


@dataclass(frozen=True)
class BoundResult:
    value: float
    construction: str
    measure: str
    k: int
    m: int
    level: int | None = None
    params: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "value": self.value,
            "construction": self.construction,
            "measure": self.measure,
            "k": self.k,
            "m": self.m,
            "level": self.level,
            **{key: _jsonable(v) for key, v in self.params.items()},
        }


def _jsonable(value: Any) -> Any:
    if isinstance(value, (tuple, list, np.ndarray)):
        return [_jsonable(v) for v in value]
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (Fraction, np.floating)):
        return float(value)
    return value


def _check(k: int, m: int, k_min: int = 1) -> None:
    if k < k_min:
        raise ValueError(f"need k >= {k_min}, got {k}")
    if m < 2:
        raise ValueError(f"need m >= 2, got {m}")


# ---------------------------------------------------------------------------
# Degree-2 and degree-3 universal parents
# ---------------------------------------------------------------------------


def _root2(k: int, m: int) -> float:
    return math.sqrt(m * m + 4 * (k - 1) * (m - 1))


def _root3(k: int, m: int) -> float:
    return math.sqrt((k - 1) * (m - 1) + 1)


def alpha(k: int, m: int) -> float:
    _check(k, m)
    return (k / m) * (1 - 2 * (m - 1) / (m - 2 + _root2(k, m)))


def beta(k: int, m: int) -> float:
    _check(k, m)
    return (k + m - 2 - _root3(k, m)) / m


def degree2_value(k: int, m: int) -> float:
    _check(k, m)
    return (m - 2 + _root2(k, m)) / (2 * k * (m - 1))


def degree2_bound(k: int, m: int, measure: str = "r") -> BoundResult:
    """Parent (S - alpha)^2: eta^r for m outcomes, eta^d for rank-one in dimension m."""
    if measure not in ("r", "d"):
        raise ValueError(f"degree-2 bound holds for measures r and d, not {measure!r}")
    return BoundResult(degree2_value(k, m), "deg2", measure, k, m, params={"alpha": alpha(k, m)})


def degree3_value(k: int, m: int) -> float:
    _check(k, m)
    return (k + m - 2 + _root3(k, m)) / (k * m)


def degree3_bound(k: int, m: int) -> BoundResult:
    """Parent S (S - beta)^2 with pinched marginals: eta^g."""
    return BoundResult(degree3_value(k, m), "deg3", "g", k, m, params={"beta": beta(k, m)})


def transfer_to_g(eta: float, divisor: int) -> float:
    """eta^g >= eta + (1 - eta)/divisor for eta = eta^d (divisor d) or eta^r (divisor n)."""
    if divisor < 1:
        raise ValueError(f"divisor must be positive, got {divisor}")
    return eta + (1 - eta) / divisor


def degree2_transferred(k: int, m: int) -> BoundResult:
    value = transfer_to_g(degree2_value(k, m), m)
    return BoundResult(value, "deg2", "g", k, m, params={"alpha": alpha(k, m), "transferred": True})


# ---------------------------------------------------------------------------
# Anticommuting dichotomic observables
# ---------------------------------------------------------------------------


def anticommuting_lambda(k: int) -> float:
    """Largest eigenvalue of sum_x (1 + s_x O_x)/2, any signs s_x."""
    return (k + math.sqrt(k)) / 2


def anticommuting_values(k: int) -> dict[str, float]:
    if k < 1:
        raise ValueError(f"need k >= 1, got {k}")
    root = math.sqrt(k)
    return {"r": 1 / root, "g": (1 + 1 / root) / 2, "p": 1 / root, "jm": 2 / (root + 1)}


# ---------------------------------------------------------------------------
# Steering robustness and dimension witness
# ---------------------------------------------------------------------------


def sr_from_eta(eta: float) -> float:
    if not 0 < eta <= 1:
        raise ValueError(f"eta must lie in (0, 1], got {eta}")
    return 1 / eta - 1


def sr_bound(k: int, d: int) -> float:
    """Largest steering robustness of a d-preparable assemblage with k settings."""
    _check(k, d, k_min=2)
    root = _root3(k, d)
    numerator = (k - 1) * d * d + (k * k - (3 + root) * k + 3) * d - (k - 1) * (k - 2)
    denominator = d * d + (k - 3) * d + (k - 1) * (k - 2)
    return numerator / denominator


def dimension_witness(sr: float, k: int) -> float:
    """Lower bound on the dimension certified by steering robustness sr with k settings."""
    if k < 2:
        raise ValueError(f"need k >= 2, got {k}")
    if sr < 0:
        raise ValueError(f"steering robustness must be nonnegative, got {sr}")
    if sr >= k - 1:
        raise UnboundedWitnessError(f"sr={sr:g} >= k-1={k - 1}: no finite dimension is excluded")
    disc = (1 - 3 * k * (k - 2)) * sr**2 + 2 * (k * (k - 2) * (2 * k - 1) + 1) * sr + (k - 1) ** 2
    return (1 + sr) * (2 * k * k - 5 * k + 3 + math.sqrt(disc) - (k - 3) * sr) / (2 * (k - 1 - sr) ** 2)


# ---------------------------------------------------------------------------
# Unbiased bases
# ---------------------------------------------------------------------------


def mub_moments(k: int, d: int, p: int) -> tuple[Fraction, Fraction, Fraction]:
    """(P, I, N) with sum_j delta(j_x,a) S^p = P P_a|x + I 1 and sum_j S^p = N 1 for k MUBs."""
    _check(k, d)
    K, D = Fraction(k), Fraction(d)
    if p == 0:
        return Fraction(0), D ** (k - 1), D**k
    if p == 1:
        return D ** (k - 1), (K - 1) * D ** (k - 2), K * D ** (k - 1)
    if p == 2:
        return (
            (D + 2 * (K - 1)) * D ** (k - 2),
            (K - 1) * (D + K - 2) * D ** (k - 3),
            K * (D + K - 1) * D ** (k - 2),
        )
    if p == 3:
        return (
            (D**2 + 5 * (K - 1) * D + 3 * (K - 1) * (K - 2)) * D ** (k - 3),
            (K - 1) * (D**2 + (3 * K - 5) * D + (K - 2) * (K - 3)) * D ** (k - 4),
            K * (D**2 + 3 * (K - 1) * D + (K - 1) * (K - 2)) * D ** (k - 3),
        )
    if p == 4:
        return (
            (D**3 + 9 * (K - 1) * D**2 + 2 * (K - 1) * (7 * K - 13) * D + 4 * (K - 1) * (K - 2) * (K - 3))
            * D ** (k - 4),
            (K - 1)
            * (D**3 + 3 * (2 * K - 3) * D**2 + (K - 2) * (6 * K - 13) * D + (K - 2) * (K - 3) * (K - 4))
            * D ** (k - 5),
            K * (D**3 + 6 * (K - 1) * D**2 + (K - 1) * (6 * K - 11) * D + (K - 1) * (K - 2) * (K - 3)) * D ** (k - 4),
        )
    raise ValueError(f"moments are tabulated for p in 0..4, got {p}")


def monomial_bounds(k: int, d: int) -> dict[int, float]:
    """eta^d certified by the parent S^i, i = 1..4."""
    out = {}
    for i in range(1, 5):
        P, _, N = mub_moments(k, d, i)
        out[i] = float(P / N)
    return out


def _quartic_coefficients(g1, g2):
    """Coefficients, lowest degree first, of (S - g1)^2 (S - g2)^2."""
    return (
        g1**2 * g2**2,
        -2 * g1 * g2 * (g1 + g2),
        g1**2 + g2**2 + 4 * g1 * g2,
        -2 * (g1 + g2),
        np.ones_like(np.asarray(g1, dtype=float)),
    )


def _quartic_eta(g1, g2, P: np.ndarray, I: np.ndarray, d: int):
    coeffs = _quartic_coefficients(g1, g2)
    c_p = sum(c * P[p] for p, c in enumerate(coeffs))
    c_id = sum(c * I[p] for p, c in enumerate(coeffs))
    denominator = c_p + d * c_id
    with np.errstate(divide="ignore", invalid="ignore"):
        eta = np.where((c_id >= 0) & (denominator > 0), c_p / denominator, -np.inf)
    return eta


def mub_degree4_bound(k: int, d: int) -> BoundResult:
    """eta^d for k MUBs from the parent (S - g1)^2 (S - g2)^2, optimised over (g1, g2)."""
    _check(k, d, k_min=2)
    moments = [mub_moments(k, d, p) for p in range(5)]
    P = np.array([float(mom[0]) for mom in moments])
    I = np.array([float(mom[1]) for mom in moments])

    axis = np.linspace(0.0, float(k), GRID_POINTS)
    g1, g2 = np.meshgrid(axis, axis, indexing="ij")
    grid = _quartic_eta(g1, g2, P, I, d)
    i, j = np.unravel_index(int(np.argmax(grid)), grid.shape)
    start = np.array([axis[i], axis[j]])
    best_grid = float(grid[i, j])

    result = minimize(
        lambda g: -float(_quartic_eta(g[0], g[1], P, I, d)),
        start,
        method="Nelder-Mead",
        options={"xatol": POLISH_TOL, "fatol": POLISH_TOL * 1e-2, "maxiter": 10_000},
    )
    polished = -float(result.fun)
    converged = bool(result.success)
    if polished >= best_grid:
        gammas = tuple(sorted(float(g) for g in result.x))
        value = polished
    else:
        gammas = tuple(sorted(start.tolist()))
        value = best_grid
    if not converged:
        logger.warning("degree-4 polish did not converge for k=%d d=%d: %s", k, d, result.message)

    return BoundResult(
        value,
        "deg4_mub",
        "d",
        k,
        d,
        params={
            "gamma": gammas,
            "coefficients": np.polynomial.polynomial.polyfromroots([gammas[0], gammas[0], gammas[1], gammas[1]]).tolist(),
            "monomial": monomial_bounds(k, d),
            "converged": converged,
        },
    )


# ---------------------------------------------------------------------------
# Parent comparison for one (k, d) cell
# ---------------------------------------------------------------------------


def summary_rows(k: int, d: int) -> list[BoundResult]:
    """Closed-form eta^g lower bounds for k measurements in dimension d."""
    rows = []
    if (k, d) == (5, 4):
        rows.append(BoundResult(CLONING_BOUND_5_4, "cloning", "g", k, d, params={"quoted": True}))
    rows.append(degree2_transferred(k, d))
    rows.append(degree3_bound(k, d))
    if 2 <= k <= d + 1:
        deg4 = mub_degree4_bound(k, d)
        rows.append(
            BoundResult(
                transfer_to_g(deg4.value, d),
                "deg4_mub",
                "g",
                k,
                d,
                params={"gamma": deg4.params["gamma"], "eta_d": deg4.value},
            )
        )
    return rows
