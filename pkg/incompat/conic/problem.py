"""
Solver-agnostic conic problem representation.

Variables are addressed by keys:

    ("scalar", i)         free scalar
    ("nonneg", i)         nonnegative scalar
    ("block", b, i, j)    entry (i, j), i <= j, of PSD block b

Linear expressions are ``{key: coeff}`` mappings. Block coefficients follow
the SDPA convention: a coefficient v on an off-diagonal key (i < j) stands for
v at both (i, j) and (j, i), so it contributes 2 v X_ij to the expression.
Use :func:`block_entry_expr` to address a single matrix entry with weight 1.

Every problem is a maximisation; inequality constraints read ``expr >= rhs``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Any, Mapping

import numpy as np

from incompat.errors import ProblemValidationError
from incompat.measurements import HermitianOp

logger = logging.getLogger(__name__)

VarKey = tuple
Expr = Mapping[VarKey, float]


def scalar(i: int) -> VarKey:
    return ("scalar", i)


def nonneg(i: int) -> VarKey:
    return ("nonneg", i)


def block_key(b: int, i: int, j: int) -> VarKey:
    return ("block", b, min(i, j), max(i, j))


def block_entry_expr(b: int, i: int, j: int, coeff: float = 1.0) -> dict[VarKey, float]:
    """Expression equal to coeff * X_b[i, j]."""
    return {block_key(b, i, j): coeff if i == j else coeff / 2}


def add_into(target: dict[VarKey, float], expr: Expr, scale: float = 1.0) -> dict[VarKey, float]:
    for key, coeff in expr.items():
        target[key] = target.get(key, 0.0) + scale * coeff
    return target


@dataclass(frozen=True)
class LinearConstraint:
    expr: Mapping[VarKey, float]
    rhs: float = 0.0
    label: str = ""

    def __post_init__(self) -> None:
        cleaned = {k: float(v) for k, v in self.expr.items() if v != 0}
        object.__setattr__(self, "expr", MappingProxyType(dict(sorted(cleaned.items(), key=_key_order))))
        object.__setattr__(self, "rhs", float(self.rhs))


def _key_order(item: tuple[VarKey, float]) -> tuple:
    key = item[0]
    kind = {"scalar": 0, "nonneg": 1, "block": 2}.get(key[0], 3)
    return (kind, *key[1:])


@dataclass(frozen=True)
class ConicProblem:
    name: str
    scalar_vars: int
    nonneg_vars: int
    psd_blocks: tuple[int, ...]
    objective: Mapping[VarKey, float]
    eq_constraints: tuple[LinearConstraint, ...]
    ineq_constraints: tuple[LinearConstraint, ...] = ()
    provenance: str = ""
    metadata: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        objective = LinearConstraint(self.objective).expr
        object.__setattr__(self, "objective", objective)
        object.__setattr__(self, "psd_blocks", tuple(int(n) for n in self.psd_blocks))
        object.__setattr__(self, "metadata", MappingProxyType(dict(self.metadata)))
        self.validate()

    def validate(self) -> None:
        if self.scalar_vars < 0 or self.nonneg_vars < 0 or any(n <= 0 for n in self.psd_blocks):
            raise ProblemValidationError(f"{self.name}: variable counts must be nonnegative, block sizes positive")
        exprs = [("objective", self.objective, 0.0)]
        exprs += [(c.label or f"eq[{i}]", c.expr, c.rhs) for i, c in enumerate(self.eq_constraints)]
        exprs += [(c.label or f"ineq[{i}]", c.expr, c.rhs) for i, c in enumerate(self.ineq_constraints)]
        for label, expr, rhs in exprs:
            if not math.isfinite(rhs):
                raise ProblemValidationError(f"{self.name}: {label} has non-finite right-hand side")
            for key, coeff in expr.items():
                if not math.isfinite(coeff):
                    raise ProblemValidationError(f"{self.name}: {label} has non-finite coefficient on {key}")
                self._check_key(label, key)

    def _check_key(self, label: str, key: VarKey) -> None:
        kind = key[0]
        if kind == "scalar" and len(key) == 2 and 0 <= key[1] < self.scalar_vars:
            return
        if kind == "nonneg" and len(key) == 2 and 0 <= key[1] < self.nonneg_vars:
            return
        if kind == "block" and len(key) == 4:
            _, b, i, j = key
            if 0 <= b < len(self.psd_blocks) and 0 <= i <= j < self.psd_blocks[b]:
                return
            if 0 <= b < len(self.psd_blocks) and i > j:
                raise ProblemValidationError(f"{self.name}: {label} uses lower-triangle key {key}")
        raise ProblemValidationError(f"{self.name}: {label} references unknown variable {key}")

    @property
    def n_constraints(self) -> int:
        return len(self.eq_constraints) + len(self.ineq_constraints)

    def stats(self) -> dict[str, int]:
        return {
            "scalars": self.scalar_vars,
            "nonneg": self.nonneg_vars,
            "blocks": len(self.psd_blocks),
            "max_block": max(self.psd_blocks, default=0),
            "eq": len(self.eq_constraints),
            "ineq": len(self.ineq_constraints),
        }

    def evaluate(self, expr: Expr, values: "PrimalValues") -> float:
        total = 0.0
        for key, coeff in expr.items():
            if key[0] == "scalar":
                total += coeff * values.scalars[key[1]]
            elif key[0] == "nonneg":
                total += coeff * values.nonneg[key[1]]
            else:
                _, b, i, j = key
                weight = 1.0 if i == j else 2.0
                total += weight * coeff * values.blocks[b][i, j]
        return float(total)


@dataclass(frozen=True)
class PrimalValues:
    scalars: np.ndarray
    nonneg: np.ndarray
    blocks: tuple[np.ndarray, ...]


class ProblemBuilder:
    """Incremental assembly of a :class:`ConicProblem`."""

    def __init__(self, name: str, provenance: str = "") -> None:
        self.name = name
        self.provenance = provenance
        self._scalars = 0
        self._nonneg = 0
        self._blocks: list[int] = []
        self._objective: dict[VarKey, float] = {}
        self._eq: list[LinearConstraint] = []
        self._ineq: list[LinearConstraint] = []
        self.metadata: dict[str, Any] = {}

    def add_scalar(self) -> VarKey:
        self._scalars += 1
        return scalar(self._scalars - 1)

    def add_nonneg(self) -> VarKey:
        self._nonneg += 1
        return nonneg(self._nonneg - 1)

    def add_block(self, size: int) -> int:
        self._blocks.append(int(size))
        return len(self._blocks) - 1

    def maximize(self, expr: Expr) -> None:
        self._objective = dict(expr)

    def add_eq(self, expr: Expr, rhs: float = 0.0, label: str = "") -> None:
        self._eq.append(LinearConstraint(expr, rhs, label))

    def add_ineq(self, expr: Expr, rhs: float = 0.0, label: str = "") -> None:
        self._ineq.append(LinearConstraint(expr, rhs, label))

    def build(self) -> ConicProblem:
        problem = ConicProblem(
            name=self.name,
            scalar_vars=self._scalars,
            nonneg_vars=self._nonneg,
            psd_blocks=tuple(self._blocks),
            objective=self._objective,
            eq_constraints=tuple(self._eq),
            ineq_constraints=tuple(self._ineq),
            provenance=self.provenance,
            metadata=self.metadata,
        )
        logger.info("Built conic problem %s", problem.name, extra={"stats": problem.stats()})
        return problem


# ---------------------------------------------------------------------------
# Complex Hermitian data as real symmetric blocks
# ---------------------------------------------------------------------------


def embed_complex(op: HermitianOp | np.ndarray) -> np.ndarray:
    """[[Re H, -Im H], [Im H, Re H]]; same spectrum as H with doubled multiplicity."""
    h = op.entries if isinstance(op, HermitianOp) else HermitianOp(np.asarray(op)).entries
    re, im = h.real, h.imag
    return np.block([[re, -im], [im, re]])


def unembed_complex(y: np.ndarray) -> np.ndarray:
    """Hermitian matrix whose embedding is the structured part of y.

    Averaging y with its image under the complex structure is a projection that
    keeps positive semidefiniteness, so any PSD y maps to a PSD result.
    """
    d = y.shape[0] // 2
    y11, y12, y21, y22 = y[:d, :d], y[:d, d:], y[d:, :d], y[d:, d:]
    g = (y11 + y22) / 2 + 1j * (y21 - y12) / 2
    return (g + g.conj().T) / 2
