"""
Measurement sets — construction, validation, serialization and the spectral
upper bounds on incompatibility.

A measurement set is k POVMs acting on one d-dimensional space. Everything
here is immutable once built: effects are stored as read-only numpy arrays and
every constructor validates Hermiticity, positivity and completeness up front,
so downstream code (SDP builders, bound evaluators) never re-checks.

Outcome tuples j = (j_1, ..., j_k) are always enumerated lexicographically.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import logging
import math
import re
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np
from pydantic import BaseModel, PositiveInt, ValidationError, ValidationInfo, field_validator

from incompat.errors import (
    ConstructionUnavailableError,
    EnumerationLimitError,
    MeasurementFileError,
    MeasurementValidationError,
)

logger = logging.getLogger(__name__)

HERMITIAN_TOL = 1e-12
VALIDATION_TOL = 1e-9
MUB_TOL = 1e-10
MAX_ENUMERATED_TUPLES = 10**7

PAULI: dict[str, np.ndarray] = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

# Complete set of MUBs for two qubits: each basis is the joint eigenbasis of a
# pair of commuting Pauli strings, and the five classes partition the fifteen
# non-identity strings (the GF(4) stabilizer construction).
TWO_QUBIT_MUB_GENERATORS: tuple[tuple[str, str], ...] = (
    ("ZI", "IZ"),
    ("XI", "IX"),
    ("YI", "IY"),
    ("XY", "YZ"),
    ("YX", "ZY"),
)


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HermitianOp:
    entries: np.ndarray

    def __post_init__(self) -> None:
        matrix = np.array(self.entries, dtype=complex)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1] or matrix.shape[0] == 0:
            raise MeasurementValidationError("dimension", float("nan"), f"shape {matrix.shape}")
        residual = float(np.max(np.abs(matrix - matrix.conj().T)))
        if residual > HERMITIAN_TOL:
            raise MeasurementValidationError("hermiticity", residual)
        matrix.setflags(write=False)
        object.__setattr__(self, "entries", matrix)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @cached_property
    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.entries)

    @property
    def trace(self) -> float:
        return float(np.real(np.trace(self.entries)))


@dataclass(frozen=True)
class Povm:
    effects: tuple[HermitianOp, ...]

    def __post_init__(self) -> None:
        effects = tuple(e if isinstance(e, HermitianOp) else HermitianOp(e) for e in self.effects)
        if not effects:
            raise MeasurementValidationError("completeness", 1.0, "no effects")
        dims = {e.dim for e in effects}
        if len(dims) != 1:
            raise MeasurementValidationError("dimension", float(len(dims)), f"effect dims {sorted(dims)}")
        for a, effect in enumerate(effects):
            min_eig = float(effect.eigenvalues[0])
            if min_eig < -VALIDATION_TOL:
                raise MeasurementValidationError("positivity", -min_eig, f"effect {a}")
        dim = effects[0].dim
        total = sum(e.entries for e in effects)
        residual = float(np.max(np.abs(total - np.eye(dim))))
        if residual > VALIDATION_TOL:
            raise MeasurementValidationError("completeness", residual)
        object.__setattr__(self, "effects", effects)

    @property
    def dim(self) -> int:
        return self.effects[0].dim

    @property
    def n_outcomes(self) -> int:
        return len(self.effects)

    @cached_property
    def projective(self) -> bool:
        return all(
            float(np.max(np.abs(e.entries @ e.entries - e.entries))) <= VALIDATION_TOL
            for e in self.effects
        )

    @cached_property
    def rank_one(self) -> bool:
        # Second-largest eigenvalue vanishing means rank at most one.
        return all(e.dim == 1 or float(e.eigenvalues[-2]) <= VALIDATION_TOL for e in self.effects)


@dataclass(frozen=True)
class MeasurementSet:
    povms: tuple[Povm, ...]
    name: str = ""

    def __post_init__(self) -> None:
        povms = tuple(p if isinstance(p, Povm) else Povm(tuple(p)) for p in self.povms)
        if not povms:
            raise MeasurementValidationError("dimension", 0.0, "empty measurement set")
        dims = {p.dim for p in povms}
        if len(dims) != 1:
            raise MeasurementValidationError(
                "dimension", float(max(dims) - min(dims)), f"povm dims {sorted(dims)}"
            )
        object.__setattr__(self, "povms", povms)

    @property
    def dim(self) -> int:
        return self.povms[0].dim

    @property
    def k(self) -> int:
        return len(self.povms)

    @property
    def outcome_counts(self) -> tuple[int, ...]:
        return tuple(p.n_outcomes for p in self.povms)

    @property
    def projective(self) -> tuple[bool, ...]:
        return tuple(p.projective for p in self.povms)

    @property
    def rank_one(self) -> tuple[bool, ...]:
        return tuple(p.rank_one for p in self.povms)

    @property
    def n_tuples(self) -> int:
        return math.prod(self.outcome_counts)

    def effect(self, a: int, x: int) -> np.ndarray:
        return self.povms[x].effects[a].entries

    def tuples(self) -> Iterator[tuple[int, ...]]:
        """Outcome tuples in lexicographic order of (j_1, ..., j_k)."""
        return itertools.product(*(range(n) for n in self.outcome_counts))

    def digest(self) -> str:
        h = hashlib.sha256()
        h.update(repr((self.dim, self.outcome_counts)).encode())
        for povm in self.povms:
            for effect in povm.effects:
                h.update(np.ascontiguousarray(effect.entries).tobytes())
        return h.hexdigest()[:16]


# ---------------------------------------------------------------------------
# Named families
# ---------------------------------------------------------------------------


def pauli_string(label: str) -> np.ndarray:
    op = np.eye(1, dtype=complex)
    for ch in label:
        op = np.kron(op, PAULI[ch])
    return op


def _dichotomic(observable: np.ndarray) -> Povm:
    identity = np.eye(observable.shape[0])
    return Povm((HermitianOp((identity + observable) / 2), HermitianOp((identity - observable) / 2)))


def pauli_qubit_bases() -> MeasurementSet:
    return MeasurementSet(tuple(_dichotomic(PAULI[p]) for p in "XYZ"), name="pauli")


def anticommuting_strings(k: int) -> list[str]:
    """Jordan-Wigner chain of k pairwise anticommuting Pauli strings.

    Qubit q carries the pair Z..Z X I..I / Z..Z Y I..I; an odd k takes the full
    Z string as its last element.
    """
    n_qubits = k // 2
    strings = []
    for q in range(n_qubits):
        prefix, suffix = "Z" * q, "I" * (n_qubits - q - 1)
        strings.append(prefix + "X" + suffix)
        strings.append(prefix + "Y" + suffix)
    if k % 2:
        strings.append("Z" * n_qubits)
    return strings


def anticommuting_dichotomic(k: int) -> MeasurementSet:
    if k < 1:
        raise ConstructionUnavailableError(f"anticommuting set needs k >= 1, got {k}")
    observables = [pauli_string(s) for s in anticommuting_strings(k)]
    return MeasurementSet(tuple(_dichotomic(o) for o in observables), name=f"anticommuting-{k}")


def _is_prime(n: int) -> bool:
    return n >= 2 and all(n % p for p in range(2, int(math.isqrt(n)) + 1))


def _prime_mub_vectors(d: int) -> list[np.ndarray]:
    """Computational basis followed by the d Fourier-type bases.

    Columns of each returned matrix are the basis vectors. For odd primes the
    a-th basis is (1/sqrt d) sum_j w^(a j^2 + b j)|j>; for d = 2 the quadratic
    phase degenerates and i^(a j) is used instead (X then Y eigenbases).
    """
    bases = [np.eye(d, dtype=complex)]
    j = np.arange(d)
    if d == 2:
        for a in range(2):
            bases.append(np.array([[1j ** (a * jj) * (-1) ** (b * jj) for b in range(2)] for jj in j]) / np.sqrt(2))
        return bases
    omega = np.exp(2j * np.pi / d)
    for a in range(d):
        columns = [omega ** ((a * j * j + b * j) % d) / np.sqrt(d) for b in range(d)]
        bases.append(np.stack(columns, axis=1))
    return bases


def _two_qubit_mub_projectors() -> list[list[np.ndarray]]:
    identity = np.eye(4)
    bases = []
    for first, second in TWO_QUBIT_MUB_GENERATORS:
        a, b = pauli_string(first), pauli_string(second)
        bases.append(
            [
                (identity + s1 * a) @ (identity + s2 * b) / 4
                for s1, s2 in itertools.product((1, -1), repeat=2)
            ]
        )
    return bases


def mub_set(d: int, k: int) -> MeasurementSet:
    if not (_is_prime(d) or d == 4):
        raise ConstructionUnavailableError(f"MUB construction unavailable for d={d} (prime d or d=4 only)")
    if not 2 <= k <= d + 1:
        raise ConstructionUnavailableError(f"need 2 <= k <= d+1 for MUBs in d={d}, got k={k}")
    if d == 4:
        projector_sets = _two_qubit_mub_projectors()[:k]
    else:
        projector_sets = [
            [np.outer(basis[:, b], basis[:, b].conj()) for b in range(d)]
            for basis in _prime_mub_vectors(d)[:k]
        ]
    povms = tuple(Povm(tuple(HermitianOp(p) for p in projectors)) for projectors in projector_sets)
    return MeasurementSet(povms, name=f"mub-{d}-{k}")


def mub_residual(mset: MeasurementSet) -> float:
    """Largest deviation from P Q P = P/d over projectors of distinct bases."""
    worst = 0.0
    for x, y in itertools.permutations(range(mset.k), 2):
        for p in mset.povms[x].effects:
            for q in mset.povms[y].effects:
                residual = p.entries @ q.entries @ p.entries - p.entries / mset.dim
                worst = max(worst, float(np.max(np.abs(residual))))
    return worst


def noisy(mset: MeasurementSet, eta: float) -> MeasurementSet:
    """Depolarised copy: every effect A becomes eta A + (1 - eta) Tr(A) 1/d."""
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"noise level must lie in [0, 1], got {eta}")
    identity = np.eye(mset.dim)
    povms = tuple(
        Povm(tuple(HermitianOp(eta * e.entries + (1 - eta) * e.trace * identity / mset.dim) for e in povm.effects))
        for povm in mset.povms
    )
    return MeasurementSet(povms, name=f"{mset.name}@{eta:g}")


def t_weights(mset: MeasurementSet) -> np.ndarray:
    """t_j = prod_x Tr A_{j_x|x}, flattened in tuple order."""
    traces = [np.array([e.trace for e in povm.effects]) for povm in mset.povms]
    weights = traces[0]
    for tr in traces[1:]:
        weights = np.multiply.outer(weights, tr)
    return np.asarray(weights).reshape(-1)


# ---------------------------------------------------------------------------
# Spectral upper bounds
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SpectralBound:
    lam: float
    f: float
    ub_r: float
    ub_g: float
    argmax: tuple[int, ...]
    heuristic: bool = False
    tuples_checked: int = 0


def upper_bound_lambda_f(
    mset: MeasurementSet, *, sample: int | None = None, seed: int = 0
) -> SpectralBound:
    """lambda = max_j ||sum_x A_{j_x|x}||, f = sum Tr A^2 / d, and the bounds
    eta^g <= lambda/f, eta^r <= (lambda - sum 1/n_x)/(f - sum 1/n_x)."""
    counts = mset.outcome_counts
    total = mset.n_tuples
    if sample is None and total > MAX_ENUMERATED_TUPLES:
        raise EnumerationLimitError(
            f"{total} outcome tuples exceed {MAX_ENUMERATED_TUPLES}; pass sample=N to subsample (heuristic)"
        )

    if sample is not None and sample < total:
        rng = np.random.default_rng(seed)
        candidates: Sequence[tuple[int, ...]] | Iterator[tuple[int, ...]] = sorted(
            {tuple(int(rng.integers(n)) for n in counts) for _ in range(sample)}
        )
        heuristic = True
    else:
        candidates = mset.tuples()
        heuristic = False

    lam, argmax, checked = -math.inf, (), 0
    for tup in candidates:
        op = sum(mset.effect(a, x) for x, a in enumerate(tup))
        top = float(np.linalg.eigvalsh(op)[-1])
        checked += 1
        if top > lam + 1e-15:
            lam, argmax = top, tup

    f = sum(
        float(np.real(np.trace(e.entries @ e.entries))) for povm in mset.povms for e in povm.effects
    ) / mset.dim
    inv_outcomes = sum(1.0 / n for n in counts)
    ub_g = lam / f
    denom = f - inv_outcomes
    ub_r = (lam - inv_outcomes) / denom if denom > VALIDATION_TOL else math.inf
    logger.debug("lambda=%.12g f=%.12g over %d tuples", lam, f, checked)
    return SpectralBound(lam, f, ub_r, ub_g, argmax, heuristic, checked)


# ---------------------------------------------------------------------------
# File format
# ---------------------------------------------------------------------------


class _MeasurementFile(BaseModel):
    dim: PositiveInt
    measurements: list[list[list[list[tuple[float, float]]]]]

    @field_validator("measurements")
    @classmethod
    def _square_effects(cls, measurements, info: ValidationInfo):
        dim = info.data.get("dim")
        if dim is None:
            return measurements
        for x, measurement in enumerate(measurements):
            for a, effect in enumerate(measurement):
                if len(effect) != dim:
                    raise ValueError(f"effect {x}.{a}: expected {dim} rows, got {len(effect)}")
                for r, row in enumerate(effect):
                    if len(row) != dim:
                        raise ValueError(f"effect {x}.{a}, row {r}: expected {dim} entries, got {len(row)}")
        return measurements


# quoted .16e strings, unquoted after json.dumps so every number keeps 17 digits
_FORMATTED_NUMBER = re.compile(r'"(-?\d\.\d{16}e[+-]\d+)"')


def _format_entry(z: complex) -> list[str]:
    return [f"{z.real:.16e}", f"{z.imag:.16e}"]


def dumps_set(mset: MeasurementSet) -> str:
    payload = {
        "dim": mset.dim,
        "measurements": [
            [[[_format_entry(z) for z in row] for row in effect.entries] for effect in povm.effects]
            for povm in mset.povms
        ],
    }
    return _FORMATTED_NUMBER.sub(r"\1", json.dumps(payload, indent=2)) + "\n"


def save_set(mset: MeasurementSet, path: str | Path) -> None:
    Path(path).write_text(dumps_set(mset), encoding="utf-8")


def loads_set(text: str, *, name: str = "") -> MeasurementSet:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MeasurementFileError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    try:
        parsed = _MeasurementFile.model_validate(raw)
    except ValidationError as exc:
        first = exc.errors()[0]
        where = ".".join(str(part) for part in first["loc"])
        raise MeasurementFileError(f"field {where}: {first['msg']}") from exc

    povms = []
    for x, measurement in enumerate(parsed.measurements):
        effects = []
        for a, effect in enumerate(measurement):
            matrix = np.array([[complex(real, imag) for real, imag in row] for row in effect], dtype=complex)
            effects.append(_located(HermitianOp, matrix, f"measurement {x}, effect {a}"))
        povms.append(_located(Povm, tuple(effects), f"measurement {x}"))
    return MeasurementSet(tuple(povms), name=name)


def _located(factory, value, location: str):
    try:
        return factory(value)
    except MeasurementValidationError as exc:
        where = f"{location}, {exc.location}" if exc.location else location
        raise MeasurementValidationError(exc.invariant, exc.residual, where) from exc


def load_set(path: str | Path) -> MeasurementSet:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise MeasurementFileError(f"cannot read {path}: {exc}") from exc
    return loads_set(text, name=path.stem)
