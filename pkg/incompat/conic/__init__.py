"""Solver-agnostic semidefinite programs: IR, SDPA codec and solver backends."""

from incompat.conic.backends import BackendRegistry, SolveReport, SolverBackend, solve
from incompat.conic.problem import (
    ConicProblem,
    LinearConstraint,
    PrimalValues,
    ProblemBuilder,
    block_entry_expr,
    block_key,
    embed_complex,
    unembed_complex,
)
from incompat.conic.sdpa import dumps_sdpa, export_sdpa, loads_sdpa, parse_sdpa

__all__ = [
    "BackendRegistry",
    "ConicProblem",
    "LinearConstraint",
    "PrimalValues",
    "ProblemBuilder",
    "SolveReport",
    "SolverBackend",
    "block_entry_expr",
    "block_key",
    "dumps_sdpa",
    "embed_complex",
    "export_sdpa",
    "loads_sdpa",
    "parse_sdpa",
    "solve",
    "unembed_complex",
]
