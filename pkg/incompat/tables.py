"""
Reproduction of the published bound tables.

Each table is a list of cells (k, d, construction). Expected values ship in
``incompat/data``; computed cells are returned in the same order so the two
can be compared row by row.
"""

from __future__ import annotations

import csv
import io
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from importlib.resources import files
from typing import Literal

from incompat.analytic import (
    CLONING_BOUND_5_4,
    degree2_transferred,
    degree3_value,
    mub_degree4_bound,
    sr_bound,
    sr_from_eta,
    transfer_to_g,
)
from incompat.errors import IncompatError
from incompat.hierarchy import solve_level
from incompat.measurements import mub_set
from incompat.robustness import solve_robustness

logger = logging.getLogger(__name__)

Table = Literal["Ia", "Ib", "II", "summary"]
TABLES: dict[str, str] = {
    "Ia": "table_Ia.csv",
    "Ib": "table_Ib.csv",
    "II": "table_II.csv",
    "summary": "summary.csv",
}
CHECK_TOL: dict[str, float] = {"Ia": 5e-5, "Ib": 1e-3, "II": 1e-4, "summary": 5e-4}
HIERARCHY_LEVEL = 3


@dataclass(frozen=True)
class Cell:
    k: int
    d: int
    value: float
    construction: str
    error: str = ""

    @property
    def failed(self) -> bool:
        return bool(self.error)


def load_expected(which: Table) -> list[Cell]:
    text = files("incompat.data").joinpath(TABLES[which]).read_text(encoding="utf-8")
    rows = csv.DictReader(line for line in io.StringIO(text) if not line.startswith("#"))
    return [Cell(int(r["k"]), int(r["d"]), float(r["value"]), r["construction"]) for r in rows]


def is_slow(which: Table, cell: Cell) -> bool:
    if which == "Ib":
        return cell.k >= 4
    if which == "summary":
        return cell.construction in ("hierarchy_t3", "exact_mub")
    return False


def compute_value(which: Table, k: int, d: int, construction: str, tol: float | None = None) -> float:
    if which == "Ia":
        return sr_bound(k, d)
    if which == "II":
        return mub_degree4_bound(k, d).value
    if which == "Ib":
        return sr_from_eta(solve_level(k, d, HIERARCHY_LEVEL, tol).value)
    return _summary_value(k, d, construction, tol)


def _summary_value(k: int, d: int, construction: str, tol: float | None) -> float:
    if construction == "cloning":
        return CLONING_BOUND_5_4
    if construction == "deg2":
        return degree2_transferred(k, d).value
    if construction == "deg3":
        return degree3_value(k, d)
    if construction == "deg4_mub":
        return transfer_to_g(mub_degree4_bound(k, d).value, d)
    if construction.startswith("hierarchy_t"):
        return solve_level(k, d, int(construction.removeprefix("hierarchy_t")), tol).value
    if construction == "exact_mub":
        return solve_robustness(mub_set(d, k), "g", tol).eta
    raise ValueError(f"unknown summary construction {construction!r}")


def _compute(task: tuple[str, int, int, str, float | None]) -> Cell:
    which, k, d, construction, tol = task
    try:
        value = compute_value(which, k, d, construction, tol)
    except IncompatError as exc:
        logger.warning("Cell k=%d d=%d (%s) failed: %s", k, d, construction, exc)
        return Cell(k, d, math.nan, construction, str(exc))
    logger.info("Cell k=%d d=%d (%s) = %.6f", k, d, construction, value)
    return Cell(k, d, value, construction)


def compute_table(
    which: Table,
    *,
    include_slow: bool = False,
    workers: int = 1,
    tol: float | None = None,
) -> list[Cell]:
    cells = [c for c in load_expected(which) if include_slow or not is_slow(which, c)]
    tasks = [(which, c.k, c.d, c.construction, tol) for c in cells]
    logger.info("Computing table %s: %d cells on %d worker(s)", which, len(tasks), workers)
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_compute, tasks))
    return [_compute(t) for t in tasks]


def max_deviation(computed: list[Cell], which: Table) -> float:
    expected = {(c.k, c.d, c.construction): c.value for c in load_expected(which)}
    worst = 0.0
    for cell in computed:
        if cell.failed:
            return math.inf
        worst = max(worst, abs(round(cell.value, 4) - expected[(cell.k, cell.d, cell.construction)]))
    return worst


def to_csv(cells: list[Cell]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["k", "d", "value", "construction"])
    for c in cells:
        writer.writerow([c.k, c.d, "nan" if c.failed else f"{c.value:.4f}", c.construction])
    return buf.getvalue()
