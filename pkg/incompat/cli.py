"""Command-line front end: ``incompat <subcommand> ...``.

Reports go to stdout (or ``--output``), JSON log lines to stderr. Exit codes:
0 success, 1 input or configuration error (or a failed ``tables --check``),
2 solver failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path
from typing import Any, Literal, Optional

from pydantic import BaseModel, ValidationError, model_validator

from incompat import __version__
from incompat.analytic import (
    alpha,
    anticommuting_values,
    beta,
    degree2_bound,
    degree2_transferred,
    degree3_bound,
    dimension_witness,
    mub_degree4_bound,
    sr_bound,
)
from incompat.config import MAX_TOL, MIN_TOL, Settings, get_settings
from incompat.conic import export_sdpa
from incompat.errors import ConfigurationError, IncompatError, SolverFailure
from incompat.hierarchy import build_hierarchy, solve_hierarchy, symmetrize
from incompat.logs import setup_logger
from incompat.measurements import (
    MAX_ENUMERATED_TUPLES,
    MeasurementSet,
    anticommuting_dichotomic,
    load_set,
    mub_set,
    noisy,
    pauli_qubit_bases,
    upper_bound_lambda_f,
)
from incompat.robustness import solve_robustness
from incompat.tables import CHECK_TOL, compute_table, max_deviation, to_csv

EXIT_OK, EXIT_INPUT, EXIT_SOLVER = 0, 1, 2

logger = setup_logger()


class RunConfig(BaseModel):
    subcommand: Literal["robustness", "tables", "witness", "hierarchy", "bounds"]
    family: Optional[Literal["pauli", "mub", "anticommuting", "file"]] = None
    path: Optional[Path] = None
    k: Optional[int] = None
    d: Optional[int] = None
    m: Optional[int] = None
    level: int = 1
    measure: Literal["d", "r", "g"] = "g"
    noise: Optional[float] = None
    tol: Optional[float] = None
    output_format: Literal["json", "csv"] = "json"
    output: Optional[Path] = None
    which: Optional[Literal["Ia", "Ib", "II", "summary"]] = None
    check: bool = False
    include_slow: bool = False
    workers: int = 1
    sr: Optional[float] = None
    mode: Literal["outcomes", "dimension"] = "outcomes"
    export_sdpa: Optional[Path] = None
    symmetrize: bool = False

    @model_validator(mode="after")
    def _combinations(self) -> "RunConfig":
        if self.tol is not None and not MIN_TOL <= self.tol <= MAX_TOL:
            raise ValueError(f"--tol must lie in [{MIN_TOL:g}, {MAX_TOL:g}]")
        if self.subcommand == "robustness":
            if self.family is None:
                raise ValueError("robustness needs --family")
            if self.family == "file" and self.path is None:
                raise ValueError("--family file needs --path")
            if self.family == "mub" and (self.k is None or self.d is None):
                raise ValueError("--family mub needs --k and --d")
            if self.family == "anticommuting" and self.k is None:
                raise ValueError("--family anticommuting needs --k")
            if self.noise is not None and not 0 <= self.noise <= 1:
                raise ValueError("--noise must lie in [0, 1]")
        if self.subcommand in ("hierarchy", "bounds") and (self.k is None or self.m is None):
            raise ValueError(f"{self.subcommand} needs --k and --m")
        if self.subcommand == "witness" and (self.k is None or self.sr is None):
            raise ValueError("witness needs --sr and --k")
        if self.workers < 1:
            raise ValueError("--workers must be positive")
        return self


def _emit(config: RunConfig, text: str) -> None:
    if config.output is not None:
        config.output.write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _json(payload: dict[str, Any]) -> str:
    settings = get_settings()
    return json.dumps({"version": __version__, "backend": settings.backend, **payload}, indent=2) + "\n"


def _build_set(config: RunConfig) -> MeasurementSet:
    if config.family == "pauli":
        mset = pauli_qubit_bases()
    elif config.family == "mub":
        mset = mub_set(config.d, config.k)
    elif config.family == "anticommuting":
        mset = anticommuting_dichotomic(config.k)
    else:
        mset = load_set(config.path)
    return noisy(mset, config.noise) if config.noise is not None else mset


def cmd_robustness(config: RunConfig) -> int:
    mset = _build_set(config)
    result = solve_robustness(mset, config.measure, config.tol)
    payload = {"set": mset.name, "dim": mset.dim, "k": mset.k, **result.to_dict()}
    # spectral upper bounds exist for eta^r and eta^g only
    if config.measure in ("r", "g") and mset.n_tuples <= MAX_ENUMERATED_TUPLES:
        bound = upper_bound_lambda_f(mset)
        payload["upper_bound"] = bound.ub_g if config.measure == "g" else bound.ub_r
    if config.output_format == "csv":
        _emit(config, "measure,eta,status,residual,time_s\n" + f"{result.measure},{result.eta:.10g},"
              f"{result.report.status},{result.report.residual:.3e},{result.report.time_s:.3f}\n")
    else:
        _emit(config, _json(payload))
    return EXIT_OK


def cmd_tables(config: RunConfig) -> int:
    cells = compute_table(config.which, include_slow=config.include_slow, workers=config.workers, tol=config.tol)
    _emit(config, to_csv(cells))
    failed = [c for c in cells if c.failed]
    if config.check:
        deviation = max_deviation(cells, config.which)
        ok = deviation <= CHECK_TOL[config.which]
        logger.info(
            "Table check",
            extra={"table": config.which, "max_deviation": deviation, "tolerance": CHECK_TOL[config.which], "ok": ok},
        )
        sys.stderr.write(f"max |delta| = {deviation:.3g} (tolerance {CHECK_TOL[config.which]:g})\n")
        if not ok and not failed:
            return EXIT_INPUT
    return EXIT_SOLVER if failed else EXIT_OK


def cmd_witness(config: RunConfig) -> int:
    bound = dimension_witness(config.sr, config.k)
    _emit(
        config,
        _json({"sr": config.sr, "k": config.k, "dimension_bound": bound, "certified_dimension": math.ceil(bound - 1e-9)}),
    )
    return EXIT_OK


def cmd_hierarchy(config: RunConfig) -> int:
    hp = build_hierarchy(config.k, config.m, config.level)
    if config.symmetrize:
        hp = symmetrize(hp)
    if config.export_sdpa is not None:
        export_sdpa(hp.problem, config.export_sdpa)
    result = solve_hierarchy(hp, config.tol)
    _emit(config, _json({"mode": config.mode, **result.to_dict()}))
    return EXIT_OK


def cmd_bounds(config: RunConfig) -> int:
    k, m = config.k, config.m
    payload: dict[str, Any] = {
        "k": k,
        "m": m,
        "alpha": alpha(k, m),
        "beta": beta(k, m),
        "deg2": degree2_bound(k, m).value,
        "deg2_g": degree2_transferred(k, m).value,
        "deg3_g": degree3_bound(k, m).value,
    }
    if k >= 2:
        payload["sr_bound"] = sr_bound(k, m)
        if k <= m + 1:
            payload["mub_deg4"] = mub_degree4_bound(k, m).to_dict()
    if m == 2:
        payload["anticommuting"] = anticommuting_values(k)
    _emit(config, _json(payload))
    return EXIT_OK


COMMANDS = {
    "robustness": cmd_robustness,
    "tables": cmd_tables,
    "witness": cmd_witness,
    "hierarchy": cmd_hierarchy,
    "bounds": cmd_bounds,
}


def build_parser(settings: Settings | None = None) -> argparse.ArgumentParser:
    settings = settings or Settings()
    parser = argparse.ArgumentParser(prog="incompat", description="Measurement incompatibility toolkit.")
    parser.add_argument("--version", action="version", version=f"incompat {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--tol", type=float, default=None, help="solver tolerance")
        p.add_argument("--output", type=Path, default=None, help="write the report here instead of stdout")

    p = sub.add_parser("robustness", help="exact robustness of an explicit measurement set")
    p.add_argument("--family", choices=["pauli", "mub", "anticommuting", "file"], required=True)
    p.add_argument("--path", type=Path)
    p.add_argument("--k", type=int)
    p.add_argument("--d", type=int)
    p.add_argument("--measure", choices=["d", "r", "g"], default="g")
    p.add_argument("--noise", type=float, help="depolarise every effect to this visibility first")
    p.add_argument("--format", dest="output_format", choices=["json", "csv"], default="json")
    common(p)

    p = sub.add_parser("tables", help="reproduce a published table as CSV")
    p.add_argument("which", choices=["Ia", "Ib", "II", "summary"])
    p.add_argument("--check", action="store_true", help="compare against the embedded expected values")
    p.add_argument("--include-slow", action="store_true")
    p.add_argument("--workers", type=int, default=settings.workers)
    common(p)

    p = sub.add_parser("witness", help="dimension lower bound from a steering robustness value")
    p.add_argument("--sr", type=float, required=True)
    p.add_argument("--k", type=int, required=True)
    common(p)

    p = sub.add_parser("hierarchy", help="solve the pinched SOS hierarchy at one level")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--level", type=int, default=1)
    p.add_argument("--mode", choices=["outcomes", "dimension"], default="outcomes")
    p.add_argument("--export-sdpa", type=Path)
    p.add_argument("--symmetrize", action="store_true")
    common(p)

    p = sub.add_parser("bounds", help="closed-form bounds for (k, m)")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    common(p)
    return parser


def main(argv: list[str] | None = None) -> int:
    try:
        settings = get_settings()
    except ConfigurationError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT
    logger.setLevel(settings.log_level)

    args = build_parser(settings).parse_args(argv)
    try:
        config = RunConfig(**{k: v for k, v in vars(args).items() if v is not None})
    except ValidationError as exc:
        first = exc.errors()[0]
        sys.stderr.write(f"invalid arguments: {first['msg']}\n")
        return EXIT_INPUT

    try:
        return COMMANDS[config.subcommand](config)
    except SolverFailure as exc:
        logger.error("Solver failure", extra={"subcommand": config.subcommand, "error": str(exc)})
        sys.stderr.write(f"solver failure: {exc}\n")
        return EXIT_SOLVER
    except (IncompatError, ValueError, OSError) as exc:
        logger.error("Input error", extra={"subcommand": config.subcommand, "error": str(exc)})
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
