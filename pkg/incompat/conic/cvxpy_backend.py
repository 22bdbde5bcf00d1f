"""
cvxpy adapter.

The problem is flattened into one vector x = [scalars, nonneg, vec(X_0), ...]
with each block vectorised column-major, so the linear data becomes two sparse
matrices and cvxpy only sees ``A_eq x == b_eq`` and ``A_in x >= b_in``.
"""

from __future__ import annotations

import importlib.util
import logging
import time

import numpy as np
import scipy.sparse as sp

from incompat.conic.backends import SolveReport, SolverBackend
from incompat.conic.problem import ConicProblem, Expr, PrimalValues
from incompat.errors import ProblemValidationError

logger = logging.getLogger(__name__)

_STATUS = {
    "optimal": "optimal",
    "optimal_inaccurate": "inaccurate",
    "infeasible": "infeasible",
    "infeasible_inaccurate": "infeasible",
    "unbounded": "unbounded",
    "unbounded_inaccurate": "unbounded",
}


class _Layout:
    def __init__(self, problem: ConicProblem) -> None:
        self.problem = problem
        self.block_offsets = []
        offset = problem.scalar_vars + problem.nonneg_vars
        for n in problem.psd_blocks:
            self.block_offsets.append(offset)
            offset += n * n
        self.size = offset

    def columns(self, key: tuple, coeff: float) -> list[tuple[int, float]]:
        kind = key[0]
        if kind == "scalar":
            return [(key[1], coeff)]
        if kind == "nonneg":
            return [(self.problem.scalar_vars + key[1], coeff)]
        _, b, i, j = key
        n, base = self.problem.psd_blocks[b], self.block_offsets[b]
        if i == j:
            return [(base + j * n + i, coeff)]
        return [(base + j * n + i, coeff), (base + i * n + j, coeff)]

    def row(self, expr: Expr) -> dict[int, float]:
        row: dict[int, float] = {}
        for key, coeff in expr.items():
            for col, value in self.columns(key, coeff):
                row[col] = row.get(col, 0.0) + value
        return row

    def matrix(self, exprs: list[Expr]) -> sp.csr_matrix:
        rows, cols, vals = [], [], []
        for r, expr in enumerate(exprs):
            for c, v in self.row(expr).items():
                rows.append(r)
                cols.append(c)
                vals.append(v)
        return sp.csr_matrix((vals, (rows, cols)), shape=(len(exprs), self.size))

    def vector(self, expr: Expr) -> np.ndarray:
        out = np.zeros(self.size)
        for c, v in self.row(expr).items():
            out[c] = v
        return out


class CvxpyBackend(SolverBackend):
    def available(self) -> bool:
        return importlib.util.find_spec("cvxpy") is not None

    def _solver_options(self, tol: float) -> dict:
        if self.solver == "SCS":
            return {"eps_abs": tol, "eps_rel": tol, "max_iters": max(self.max_iters, 10_000)}
        if self.solver == "CLARABEL":
            return {"tol_gap_abs": tol, "tol_gap_rel": tol, "tol_feas": tol, "max_iter": self.max_iters}
        return {}

    def solve(self, problem: ConicProblem, tol: float) -> SolveReport:
        import cvxpy as cp

        layout = _Layout(problem)
        parts = []
        scalars = cp.Variable(problem.scalar_vars) if problem.scalar_vars else None
        nonnegs = cp.Variable(problem.nonneg_vars, nonneg=True) if problem.nonneg_vars else None
        blocks = [cp.Variable((n, n), PSD=True) for n in problem.psd_blocks]
        if scalars is not None:
            parts.append(scalars)
        if nonnegs is not None:
            parts.append(nonnegs)
        parts.extend(cp.vec(block, order="F") for block in blocks)
        if not parts:
            raise ProblemValidationError(f"{problem.name}: no variables")
        x = cp.hstack(parts) if len(parts) > 1 else parts[0]

        constraints = []
        b_eq = np.array([c.rhs for c in problem.eq_constraints])
        b_in = np.array([c.rhs for c in problem.ineq_constraints])
        if problem.eq_constraints:
            a_eq = layout.matrix([c.expr for c in problem.eq_constraints])
            constraints.append(a_eq @ x == b_eq)
        if problem.ineq_constraints:
            a_in = layout.matrix([c.expr for c in problem.ineq_constraints])
            constraints.append(a_in @ x >= b_in)

        cvx_problem = cp.Problem(cp.Maximize(layout.vector(problem.objective) @ x), constraints)
        start = time.perf_counter()
        try:
            cvx_problem.solve(solver=self.solver, **self._solver_options(tol))
        except (cp.SolverError, ValueError) as exc:
            elapsed = time.perf_counter() - start
            logger.warning("Backend error on %s: %s", problem.name, exc)
            return SolveReport("failed", float("nan"), float("inf"), elapsed, self.backend_id, self.solver, str(exc))
        elapsed = time.perf_counter() - start

        status = _STATUS.get(cvx_problem.status, "failed")
        if status not in ("optimal", "inaccurate") or x.value is None:
            return SolveReport(
                status if status != "optimal" else "failed",
                float("nan"),
                float("inf"),
                elapsed,
                self.backend_id,
                self.solver,
                f"cvxpy status {cvx_problem.status}",
            )

        primal = PrimalValues(
            scalars=np.asarray(scalars.value if scalars is not None else np.zeros(0), dtype=float).reshape(-1),
            nonneg=np.asarray(nonnegs.value if nonnegs is not None else np.zeros(0), dtype=float).reshape(-1),
            blocks=tuple(np.asarray((b.value + b.value.T) / 2) for b in blocks),
        )
        residual = primal_residual(problem, primal)
        if status == "optimal" and residual > tol:
            status = "inaccurate"
        return SolveReport(
            status,
            float(cvx_problem.value),
            residual,
            elapsed,
            self.backend_id,
            self.solver,
            f"cvxpy status {cvx_problem.status}",
            primal,
        )


def primal_residual(problem: ConicProblem, primal: PrimalValues) -> float:
    """Worst constraint or cone violation, relative to 1 + max |rhs|."""
    worst = 0.0
    scale = 1.0 + max(
        (abs(c.rhs) for c in (*problem.eq_constraints, *problem.ineq_constraints)), default=0.0
    )
    for c in problem.eq_constraints:
        worst = max(worst, abs(problem.evaluate(c.expr, primal) - c.rhs))
    for c in problem.ineq_constraints:
        worst = max(worst, c.rhs - problem.evaluate(c.expr, primal))
    if primal.nonneg.size:
        worst = max(worst, float(-primal.nonneg.min()))
    for block in primal.blocks:
        worst = max(worst, float(-np.linalg.eigvalsh(block)[0]))
    return max(worst, 0.0) / scale
