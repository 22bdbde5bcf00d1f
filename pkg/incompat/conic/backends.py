from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, Literal

from incompat.config import MAX_TOL, MIN_TOL, get_settings
from incompat.conic.problem import ConicProblem, PrimalValues
from incompat.errors import ConfigurationError

logger = logging.getLogger(__name__)

Status = Literal["optimal", "infeasible", "unbounded", "inaccurate", "failed"]


@dataclass(frozen=True)
class SolveReport:
    status: Status
    objective: float
    residual: float
    time_s: float
    backend: str = ""
    solver: str = ""
    message: str = ""
    primal: PrimalValues | None = field(default=None, repr=False, compare=False)

    @property
    def ok(self) -> bool:
        return self.status in ("optimal", "inaccurate")

    def to_dict(self) -> dict[str, Any]:
        return {
            "status": self.status,
            "objective": self.objective,
            "residual": self.residual,
            "time_s": self.time_s,
            "backend": self.backend,
            "solver": self.solver,
            "message": self.message,
        }


class SolverBackend(ABC):
    """Contract every conic solver adapter implements."""

    def __init__(self, backend_id: str, solver: str | None = None, max_iters: int | None = None):
        settings = get_settings()
        self.backend_id = backend_id
        self.solver = (solver or settings.solver).upper()
        self.max_iters = max_iters or settings.max_iters

    @abstractmethod
    def available(self) -> bool: ...

    @abstractmethod
    def solve(self, problem: ConicProblem, tol: float) -> SolveReport: ...


class BackendRegistry:
    _backends: dict[str, type[SolverBackend]] = {}

    @classmethod
    def register(cls, backend_id: str, backend_cls: type[SolverBackend]) -> None:
        cls._backends[backend_id] = backend_cls

    @classmethod
    def get(cls, backend_id: str) -> type[SolverBackend]:
        cls_ = cls._backends.get(backend_id)
        if not cls_:
            msg = f"Unknown solver backend: {backend_id}. Available: {list(cls._backends.keys())}"
            raise ConfigurationError(msg)
        return cls_

    @classmethod
    def list_backends(cls) -> list[str]:
        return list(cls._backends.keys())

    @classmethod
    def create_instance(cls, backend_id: str, **kwargs: Any) -> SolverBackend:
        backend = cls.get(backend_id)(backend_id=backend_id, **kwargs)
        if not backend.available():
            raise ConfigurationError(f"Solver backend {backend_id!r} is registered but not importable")
        return backend


def check_tolerance(tol: float) -> float:
    if not MIN_TOL <= tol <= MAX_TOL:
        raise ConfigurationError(f"tolerance {tol:g} outside [{MIN_TOL:g}, {MAX_TOL:g}]")
    return float(tol)


def solve(
    problem: ConicProblem,
    tol: float | None = None,
    *,
    backend: str | None = None,
    solver: str | None = None,
) -> SolveReport:
    settings = get_settings()
    tol = check_tolerance(settings.tol if tol is None else tol)
    adapter = BackendRegistry.create_instance(backend or settings.backend, solver=solver)
    report = adapter.solve(problem, tol)
    level = logging.INFO if report.ok else logging.WARNING
    logger.log(
        level,
        "Solved %s: %s objective=%.10g residual=%.2e in %.3fs",
        problem.name,
        report.status,
        report.objective,
        report.residual,
        report.time_s,
        extra={"backend": report.backend, "solver": report.solver},
    )
    return report


# Auto-register built-in backends
from incompat.conic.cvxpy_backend import CvxpyBackend  # noqa: E402

BackendRegistry.register("cvxpy", CvxpyBackend)
