"""
Incompatibility robustness of explicit measurement sets as semidefinite programs.

Three noise models are supported:

``d`` (depolarising)
    sum_j delta(j_x, a) G_j = eta A_a|x + (1 - eta) Tr(A_a|x) 1/d
``r`` (random outcomes)
    sum_j delta(j_x, a) G_j = eta A_a|x + (1 - eta) 1/n_x
``g`` (generalised)
    sum_j G_j = 1  and  sum_j delta(j_x, a) G_j - eta A_a|x >= 0

The parent G has one PSD block per outcome tuple j, in lexicographic tuple
order (block index == position in ``MeasurementSet.tuples()``). Complex blocks
are carried as their real 2d x 2d embedding.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from typing import Any, Literal

import numpy as np

from incompat import __version__
from incompat.conic import (
    ConicProblem,
    ProblemBuilder,
    SolveReport,
    block_entry_expr,
    embed_complex,
    solve,
    unembed_complex,
)
from incompat.conic.problem import add_into
from incompat.errors import (
    EnumerationLimitError,
    MismatchedResultsError,
    ProblemValidationError,
    SolverFailure,
)
from incompat.measurements import MeasurementSet

logger = logging.getLogger(__name__)

Measure = Literal["d", "r", "g"]
MEASURES: tuple[str, ...] = ("d", "r", "g")
MAX_SDP_TUPLES = 10**5
PSD_TOL = 1e-7
CONSTRAINT_TOL = 1e-6


@dataclass(frozen=True)
class RobustnessResult:
    measure: Measure
    eta: float
    report: SolveReport
    parent: tuple[np.ndarray, ...] | None = None
    set_digest: str = ""
    dim: int = 0
    n_max: int = 0

    def to_dict(self) -> dict[str, Any]:
        return {
            "measure": self.measure,
            "eta": self.eta,
            "status": self.report.status,
            "residual": self.report.residual,
            "time_s": self.report.time_s,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _matrix_equalities(
    builder: ProblemBuilder,
    blocks: list[tuple[int, float]],
    eta_key: tuple | None,
    eta_matrix: np.ndarray | None,
    rhs_matrix: np.ndarray,
    label: str,
) -> None:
    """sum_b w_b Y_b - eta * eta_matrix == rhs_matrix, entrywise on the upper triangle."""
    size = rhs_matrix.shape[0]
    for r in range(size):
        for c in range(r, size):
            expr: dict = {}
            for b, weight in blocks:
                add_into(expr, block_entry_expr(b, r, c, weight))
            if eta_key is not None and eta_matrix is not None and eta_matrix[r, c] != 0:
                expr[eta_key] = expr.get(eta_key, 0.0) - float(eta_matrix[r, c])
            builder.add_eq(expr, float(rhs_matrix[r, c]), f"{label}[{r},{c}]")


def build_robustness_sdp(mset: MeasurementSet, measure: Measure) -> ConicProblem:
    if measure not in MEASURES:
        raise ProblemValidationError(f"unknown measure {measure!r}; expected one of {MEASURES}")
    if mset.n_tuples > MAX_SDP_TUPLES:
        raise EnumerationLimitError(f"{mset.n_tuples} outcome tuples exceed the SDP limit {MAX_SDP_TUPLES}")

    d = mset.dim
    size = 2 * d
    identity = np.eye(size)
    builder = ProblemBuilder(
        name=f"robustness-{measure}-{mset.name or 'set'}",
        provenance=f"incompat {__version__} robustness measure={measure} set={mset.name} digest={mset.digest()}",
    )
    eta = builder.add_scalar()
    tuples = list(mset.tuples())
    parent_blocks = [builder.add_block(size) for _ in tuples]
    builder.metadata.update(measure=measure, k=mset.k, dim=d, tuples=len(tuples))

    if measure == "g":
        _matrix_equalities(builder, [(b, 1.0) for b in parent_blocks], None, None, identity, "sum")
    for x, povm in enumerate(mset.povms):
        for a, effect in enumerate(povm.effects):
            members = [(b, 1.0) for b, tup in zip(parent_blocks, tuples) if tup[x] == a]
            embedded = embed_complex(effect)
            label = f"marginal[{x},{a}]"
            if measure == "g":
                slack = builder.add_block(size)
                _matrix_equalities(builder, members + [(slack, -1.0)], eta, embedded, np.zeros((size, size)), label)
                continue
            # For x >= 1 the last outcome row is implied by the x = 0 rows.
            if x >= 1 and a == povm.n_outcomes - 1:
                continue
            shift = effect.trace / d if measure == "d" else 1.0 / povm.n_outcomes
            _matrix_equalities(builder, members, eta, embedded - shift * identity, shift * identity, label)
    if measure != "g":
        builder.add_ineq({eta: -1.0}, -1.0, "eta<=1")
    builder.maximize({eta: 1.0})
    return builder.build()


def solve_robustness(
    mset: MeasurementSet,
    measure: Measure,
    tol: float | None = None,
    *,
    backend: str | None = None,
    solver: str | None = None,
) -> RobustnessResult:
    problem = build_robustness_sdp(mset, measure)
    report = solve(problem, tol, backend=backend, solver=solver)
    if not report.ok:
        raise SolverFailure(
            f"robustness SDP {problem.name} ended with status {report.status}: {report.message}",
            report=report,
            stats=problem.stats(),
        )
    if report.status == "inaccurate":
        logger.warning("Robustness SDP %s solved inaccurately (residual %.2e)", problem.name, report.residual)

    eta = min(max(report.objective, 0.0), 1.0)
    parent = None
    if report.primal is not None:
        parent = tuple(unembed_complex(report.primal.blocks[b]) for b in range(mset.n_tuples))
    return RobustnessResult(
        measure=measure,
        eta=eta,
        report=report,
        parent=parent,
        set_digest=mset.digest(),
        dim=mset.dim,
        n_max=max(mset.outcome_counts),
    )


def verify_certificate(mset: MeasurementSet, result: RobustnessResult) -> float:
    """Worst violation of the defining constraints by the extracted parent."""
    if result.parent is None:
        raise ProblemValidationError("result carries no parent certificate")
    if result.set_digest and result.set_digest != mset.digest():
        raise MismatchedResultsError("certificate belongs to a different measurement set")

    d, eta = mset.dim, result.eta
    identity = np.eye(d)
    tuples = list(mset.tuples())
    worst = max(float(-np.linalg.eigvalsh(g)[0]) for g in result.parent)
    if result.measure == "g":
        worst = max(worst, float(np.max(np.abs(sum(result.parent) - identity))))
    for x, povm in enumerate(mset.povms):
        for a, effect in enumerate(povm.effects):
            marginal = sum(g for g, tup in zip(result.parent, tuples) if tup[x] == a)
            if result.measure == "g":
                worst = max(worst, float(-np.linalg.eigvalsh(marginal - eta * effect.entries)[0]))
                continue
            shift = effect.trace / d if result.measure == "d" else 1.0 / povm.n_outcomes
            target = eta * effect.entries + (1 - eta) * shift * identity
            worst = max(worst, float(np.max(np.abs(marginal - target))))
    return max(worst, 0.0)


def check_measure_inequalities(
    res_d: RobustnessResult,
    res_r: RobustnessResult,
    res_g: RobustnessResult,
    d: int,
    n_max: int,
    tol: float = CONSTRAINT_TOL,
) -> bool:
    """eta^d + (1 - eta^d)/d <= eta^g and eta^r + (1 - eta^r)/n_max <= eta^g."""
    if (res_d.measure, res_r.measure, res_g.measure) != ("d", "r", "g"):
        raise MismatchedResultsError("expected results for measures d, r, g in that order")
    digests = {r.set_digest for r in (res_d, res_r, res_g)}
    if len(digests) > 1:
        raise MismatchedResultsError("robustness results come from different measurement sets")
    lhs_d = res_d.eta + (1 - res_d.eta) / d
    lhs_r = res_r.eta + (1 - res_r.eta) / n_max
    return lhs_d <= res_g.eta + tol and lhs_r <= res_g.eta + tol
