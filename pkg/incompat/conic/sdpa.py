"""
SDPA sparse (.dat-s) export and import.

The exported file describes the standard form

    maximise <F0, Y>  subject to  <Fk, Y> = c_k,  Y = diag(Y_1, ..., Y_B, D) >= 0

The trailing diagonal block D (written with a negative size) holds, in this
order: the nonnegative variables, a (plus, minus) pair for every free scalar,
and one slack per inequality. PSD blocks keep their numbering, starting at 1.
Entry lines are sorted by (constraint, block, row, column), so identical
problems always produce identical bytes.
"""

from __future__ import annotations

import logging
import math
from collections import defaultdict
from pathlib import Path

from incompat.conic.problem import ConicProblem, LinearConstraint, block_key, nonneg
from incompat.errors import ProblemValidationError

logger = logging.getLogger(__name__)

COMMENT_PREFIXES = ('"', "*")


def _num(value: float) -> str:
    text = format(value, ".17g")
    return "0" if text == "-0" else text


def _standard_form(problem: ConicProblem) -> tuple[list[int], list[float], dict[tuple[int, int, int, int], float]]:
    n_blocks = len(problem.psd_blocks)
    diag_block = n_blocks + 1
    n_ineq = len(problem.ineq_constraints)
    diag_size = problem.nonneg_vars + 2 * problem.scalar_vars + n_ineq

    def place(key: tuple, coeff: float) -> list[tuple[int, int, int, float]]:
        kind = key[0]
        if kind == "block":
            _, b, i, j = key
            return [(b + 1, i + 1, j + 1, coeff)]
        if kind == "nonneg":
            pos = key[1] + 1
            return [(diag_block, pos, pos, coeff)]
        pos = problem.nonneg_vars + 2 * key[1] + 1
        return [(diag_block, pos, pos, coeff), (diag_block, pos + 1, pos + 1, -coeff)]

    entries: dict[tuple[int, int, int, int], float] = defaultdict(float)

    def emit(k: int, expr) -> None:
        for key, coeff in expr.items():
            for b, i, j, v in place(key, coeff):
                entries[(k, b, i, j)] += v

    emit(0, problem.objective)
    rhs: list[float] = []
    k = 0
    for c in problem.eq_constraints:
        k += 1
        emit(k, c.expr)
        rhs.append(c.rhs)
    slack_base = problem.nonneg_vars + 2 * problem.scalar_vars
    for s, c in enumerate(problem.ineq_constraints):
        k += 1
        emit(k, c.expr)
        pos = slack_base + s + 1
        entries[(k, diag_block, pos, pos)] -= 1.0
        rhs.append(c.rhs)

    sizes = list(problem.psd_blocks)
    if diag_size:
        sizes.append(-diag_size)
    return sizes, rhs, {key: v for key, v in entries.items() if v != 0.0}


def dumps_sdpa(problem: ConicProblem) -> str:
    sizes, rhs, entries = _standard_form(problem)
    lines = []
    if problem.provenance:
        lines.append('"' + " ".join(problem.provenance.split()))
    lines.append(str(len(rhs)))
    lines.append(str(len(sizes)))
    lines.append(" ".join(str(n) for n in sizes))
    lines.append(" ".join(_num(v) for v in rhs) if rhs else "")
    for (k, b, i, j), v in sorted(entries.items()):
        lines.append(f"{k} {b} {i} {j} {_num(v)}")
    return "\n".join(lines) + "\n"


def export_sdpa(problem: ConicProblem, path: str | Path) -> Path:
    path = Path(path)
    text = dumps_sdpa(problem)
    try:
        path.write_text(text, encoding="ascii")
    except OSError as exc:
        raise ProblemValidationError(f"cannot write {path}: {exc}") from exc
    logger.info("Exported %s to %s", problem.name, path, extra={"stats": problem.stats()})
    return path


def _tokens(text: str) -> list[str]:
    tokens = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith(COMMENT_PREFIXES):
            continue
        # Separators {}(), are permitted in the header lines.
        for ch in "{}(),":
            line = line.replace(ch, " ")
        tokens.extend(line.split())
    return tokens


def loads_sdpa(text: str, name: str = "sdpa") -> ConicProblem:
    """Standard-form problem: every SDPA block becomes a PSD block or, when
    diagonal, a run of nonnegative variables."""
    tokens = _tokens(text)
    pos = 0

    def take(count: int, cast) -> list:
        nonlocal pos
        if pos + count > len(tokens):
            raise ProblemValidationError(f"{name}: truncated SDPA header")
        try:
            values = [cast(t) for t in tokens[pos : pos + count]]
        except ValueError as exc:
            raise ProblemValidationError(f"{name}: bad SDPA token near position {pos}: {exc}") from exc
        pos += count
        return values

    (m,) = take(1, int)
    (n_blocks,) = take(1, int)
    sizes = take(n_blocks, lambda t: int(float(t)))
    rhs = take(m, float)
    if any(s == 0 for s in sizes):
        raise ProblemValidationError(f"{name}: zero block size")

    psd_index: dict[int, int] = {}
    diag_offset: dict[int, int] = {}
    psd_sizes: list[int] = []
    n_nonneg = 0
    for b, size in enumerate(sizes, start=1):
        if size > 0:
            psd_index[b] = len(psd_sizes)
            psd_sizes.append(size)
        else:
            diag_offset[b] = n_nonneg
            n_nonneg += -size

    exprs: list[dict] = [dict() for _ in range(m + 1)]
    rest = tokens[pos:]
    if len(rest) % 5:
        raise ProblemValidationError(f"{name}: entry section is not a multiple of five tokens")
    for at in range(0, len(rest), 5):
        try:
            k, b, i, j = (int(t) for t in rest[at : at + 4])
            v = float(rest[at + 4])
        except ValueError as exc:
            raise ProblemValidationError(f"{name}: bad entry line {rest[at:at + 5]}") from exc
        if not 0 <= k <= m or b not in psd_index and b not in diag_offset:
            raise ProblemValidationError(f"{name}: entry {rest[at:at + 5]} out of range")
        if not math.isfinite(v):
            raise ProblemValidationError(f"{name}: non-finite entry {rest[at:at + 5]}")
        if b in psd_index:
            key = block_key(psd_index[b], i - 1, j - 1)
        else:
            if i != j:
                raise ProblemValidationError(f"{name}: off-diagonal entry in diagonal block {b}")
            key = nonneg(diag_offset[b] + i - 1)
        exprs[k][key] = exprs[k].get(key, 0.0) + v

    return ConicProblem(
        name=name,
        scalar_vars=0,
        nonneg_vars=n_nonneg,
        psd_blocks=tuple(psd_sizes),
        objective=exprs[0],
        eq_constraints=tuple(LinearConstraint(exprs[k], rhs[k - 1], f"c{k}") for k in range(1, m + 1)),
    )


def parse_sdpa(path: str | Path) -> ConicProblem:
    path = Path(path)
    try:
        text = path.read_text(encoding="ascii")
    except OSError as exc:
        raise ProblemValidationError(f"cannot read {path}: {exc}") from exc
    return loads_sdpa(text, name=path.stem)
