"""
Restricted sum-of-squares hierarchy for universal lower bounds on eta^g.

At level t the parent is G = sum_{u,v} M_uv u^+ v over normal words u, v of
length <= t, with M real symmetric PSD. Every product word w = u^+ v is
classified by the rewriting calculus:

* not normalisable, or without a marginal along some x: its coefficient is 0;
* marginal uses the pinching bound: its coefficient is >= 0;

and the program maximises eta subject to

    sum_w c_w sigma(w) = 1,
    sum_w c_w (cP_x(w) + cId_x(w)) >= eta,   sum_w c_w cId_x(w) >= 0   for all x.

Words w and adjoint(w) always carry the same coefficient, so the bookkeeping is
done per class {w, adjoint(w)}.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator

import numpy as np

from incompat import __version__
from incompat.analytic import BoundResult
from incompat.conic import ConicProblem, ProblemBuilder, solve
from incompat.conic.problem import add_into, block_entry_expr
from incompat.errors import EnumerationLimitError, ProblemValidationError, SolverFailure
from incompat.ncpoly.rewriting import MarginalResult, sigma, sigma_x
from incompat.ncpoly.word import Word, adjoint, canonical, normalize

logger = logging.getLogger(__name__)

MAX_BASIS = 5000
SYMMETRY_SEED = 7
EIGEN_CLUSTER_TOL = 1e-8
RANK_TOL = 1e-9
REDUCED_COEFF_TOL = 1e-12


# ---------------------------------------------------------------------------
# Gram basis
# ---------------------------------------------------------------------------


def basis_size(k: int, t: int) -> int:
    return 1 + sum(k * (k - 1) ** (length - 1) for length in range(1, t + 1))


@dataclass(frozen=True)
class GramBasis:
    k: int
    t: int
    words: tuple[Word, ...]

    def __len__(self) -> int:
        return len(self.words)

    def __iter__(self) -> Iterator[Word]:
        return iter(self.words)

    def index(self, w: Word) -> int:
        return self.words.index(w)


def enumerate_basis(k: int, t: int) -> GramBasis:
    if k < 2 or t < 1:
        raise ValueError(f"need k >= 2 and t >= 1, got k={k}, t={t}")
    size = basis_size(k, t)
    if size > MAX_BASIS:
        raise EnumerationLimitError(f"Gram basis for k={k}, t={t} has {size} words (limit {MAX_BASIS})")
    words: list[Word] = [()]
    layer: list[Word] = [()]
    for _ in range(t):
        layer = [w + (x,) for w in layer for x in range(1, k + 1) if not w or w[-1] != x]
        words.extend(layer)
    return GramBasis(k, t, tuple(words))


def relabel(*parts: Word) -> tuple[Word, ...]:
    """Rename letters by order of first appearance across the parts."""
    names: dict[int, int] = {}
    out = []
    for part in parts:
        out.append(tuple(names.setdefault(x, len(names) + 1) for x in part))
    return tuple(out)


def word_orbits(basis: GramBasis) -> list[list[Word]]:
    """Basis words grouped by orbit under permutations of the letters."""
    orbits: dict[Word, list[Word]] = {}
    for w in basis.words:
        orbits.setdefault(relabel(w)[0], []).append(w)
    return list(orbits.values())


def _pair_orbit(u: Word, v: Word) -> tuple:
    return min(relabel(u, v), relabel(v, u))


def _class_orbit(rep: Word) -> tuple:
    return min(relabel(rep), relabel(adjoint(rep)))


# ---------------------------------------------------------------------------
# Symmetry reduction
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SymmetryReduction:
    """Gram matrices invariant under letter permutations, block-diagonalised.

    ``orbit_ids[i, j]`` numbers the orbit of the position {(i, j), (j, i)}.
    Each ``bases[b]`` (n x m_b, orthonormal columns) spans one copy of an
    isotypic component that occurs ``multiplicities[b]`` times. An invariant M
    is PSD iff every block Z_b = bases[b].T M bases[b] is, and for any
    symmetric C, <C, M> = sum_b multiplicities[b] <bases[b].T avg(C) bases[b], Z_b>.
    """

    orbit_ids: np.ndarray
    bases: tuple[np.ndarray, ...]
    multiplicities: tuple[int, ...]

    @property
    def n_orbits(self) -> int:
        return int(self.orbit_ids.max()) + 1

    def average(self, matrix: np.ndarray) -> np.ndarray:
        """Projection onto invariant matrices: every entry replaced by its orbit mean."""
        ids = self.orbit_ids.ravel()
        sums = np.bincount(ids, weights=np.asarray(matrix, dtype=float).ravel(), minlength=self.n_orbits)
        counts = np.bincount(ids, minlength=self.n_orbits)
        return (sums / counts)[self.orbit_ids]

    def project(self, matrix: np.ndarray) -> list[np.ndarray]:
        """Block coefficients of the linear functional <matrix, .> on invariant M."""
        avg = self.average(matrix)
        return [mult * (q.T @ avg @ q) for q, mult in zip(self.bases, self.multiplicities)]

    def lift(self, blocks) -> np.ndarray:
        """Invariant Gram matrix whose blocks are ``blocks``."""
        total = sum(
            mult * (q @ np.asarray(z) @ q.T) for q, mult, z in zip(self.bases, self.multiplicities, blocks)
        )
        return self.average(total)


def _orbit_ids(basis: GramBasis) -> np.ndarray:
    n = len(basis)
    keys: dict[tuple, int] = {}
    ids = np.empty((n, n), dtype=np.intp)
    for i in range(n):
        for j in range(i, n):
            ids[i, j] = ids[j, i] = keys.setdefault(_pair_orbit(basis.words[i], basis.words[j]), len(keys))
    return ids


def symmetry_reduction(basis: GramBasis, seed: int = SYMMETRY_SEED) -> SymmetryReduction:
    """Isotypic decomposition of the basis under letter permutations.

    A generic invariant matrix has one eigenvalue per (component, copy of the
    multiplicity space), repeated once per dimension of the irreducible
    representation. The invariant algebra applied to one eigenvector spans a
    copy of its component's multiplicity space.
    """
    ids = _orbit_ids(basis)
    n = len(basis)
    n_orbits = int(ids.max()) + 1
    generic = np.random.default_rng(seed).standard_normal(n_orbits)[ids]
    values, vectors = np.linalg.eigh(generic)
    tol = EIGEN_CLUSTER_TOL * max(1.0, float(np.abs(values).max()))
    splits = np.flatnonzero(np.diff(values) > tol) + 1
    clusters = np.split(np.arange(n), splits)
    centres = np.array([values[c].mean() for c in clusters])

    rows, cols = np.indices((n, n))
    rows, cols, flat_ids = rows.ravel(), cols.ravel(), ids.ravel()
    covered = np.zeros(len(clusters), dtype=bool)
    bases: list[np.ndarray] = []
    multiplicities: list[int] = []
    for c, members in enumerate(clusters):
        if covered[c]:
            continue
        v = vectors[:, members[0]]
        images = np.zeros((n, n_orbits))
        np.add.at(images, (rows, flat_ids), v[cols])
        u, s, _ = np.linalg.svd(images, full_matrices=False)
        q = u[:, : int(np.sum(s > RANK_TOL * s[0]))]
        for mu in np.linalg.eigvalsh(q.T @ generic @ q):
            covered[int(np.argmin(np.abs(centres - mu)))] = True
        bases.append(q)
        multiplicities.append(len(members))

    dimension = sum(q.shape[1] * mult for q, mult in zip(bases, multiplicities))
    if dimension != n or not covered.all():
        raise ProblemValidationError(
            f"symmetry reduction of the k={basis.k}, t={basis.t} basis covers {dimension} of {n} dimensions"
        )
    logger.debug("Isotypic blocks %s with multiplicities %s", [q.shape[1] for q in bases], multiplicities)
    return SymmetryReduction(ids, tuple(bases), tuple(multiplicities))


# ---------------------------------------------------------------------------
# Word classification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WordClass:
    word: Word
    sigma: Fraction | None
    marginals: tuple[MarginalResult | None, ...]

    @property
    def admissible(self) -> bool:
        return self.sigma is not None and all(r is not None for r in self.marginals)

    @property
    def pinched(self) -> bool:
        return self.admissible and any(r.used_pinch for r in self.marginals)


def classify_word(w: Word, k: int, m: int) -> WordClass:
    return WordClass(
        word=w,
        sigma=sigma(w, k, m),
        marginals=tuple(sigma_x(w, x, k, m) for x in range(1, k + 1)),
    )


@dataclass
class HierarchyProblem:
    basis: GramBasis
    m: int
    pair_words: dict[tuple[int, int], Word]
    classes: dict[Word, WordClass]
    coefficients: dict[Word, list[tuple[int, int]]]
    problem: ConicProblem
    symmetric: bool = False
    gram_parameters: int = 0
    eta_key: tuple = ("scalar", 0)
    stats: dict[str, int] = field(default_factory=dict)
    reduction: SymmetryReduction | None = None

    @property
    def k(self) -> int:
        return self.basis.k

    @property
    def t(self) -> int:
        return self.basis.t

    def gram_matrix(self, blocks) -> np.ndarray:
        """Full Gram matrix from the solved PSD blocks."""
        if self.reduction is None:
            return np.asarray(blocks[0])
        return self.reduction.lift(blocks)

    def word_coefficients(self, gram) -> dict[Word, float]:
        """Coefficient of each class representative in the parent built from gram."""
        out: dict[Word, float] = {}
        for rep, pairs in self.coefficients.items():
            total = 0.0
            for i, j in pairs:
                total += float(gram[i, j])
            out[rep] = total
        return out


def _functional(classes: dict[Word, WordClass], w_ij: Word, w_ji: Word, value) -> float:
    """(f(w_ij) + f(w_ji))/2, zero on inadmissible words."""
    total = 0.0
    for w in (w_ij, w_ji):
        cls = classes[canonical(w)]
        if cls.admissible:
            total += float(value(cls))
    return total / 2


def _reduce_expr(expr: dict, reduction: SymmetryReduction, n: int) -> dict:
    """Rewrite an expression on the full Gram block in terms of the reduced blocks."""
    matrix = np.zeros((n, n))
    out: dict = {}
    for key, coeff in expr.items():
        if key[0] != "block":
            out[key] = out.get(key, 0.0) + coeff
            continue
        _, _, i, j = key
        matrix[i, j] += coeff
        if i != j:
            matrix[j, i] += coeff
    for b, block in enumerate(reduction.project(matrix)):
        size = block.shape[0]
        for a in range(size):
            for c in range(a, size):
                value = float(block[a, c])
                if abs(value) > REDUCED_COEFF_TOL:
                    out[("block", b, a, c)] = value
    return out


def _assemble(
    basis: GramBasis,
    m: int,
    pair_words: dict[tuple[int, int], Word],
    classes: dict[Word, WordClass],
    coefficients: dict[Word, list[tuple[int, int]]],
    reduction: SymmetryReduction | None,
) -> HierarchyProblem:
    k, t = basis.k, basis.t
    n = len(basis)
    symmetric = reduction is not None
    builder = ProblemBuilder(
        name=f"hierarchy-k{k}-m{m}-t{t}{'-sym' if symmetric else ''}",
        provenance=f"incompat {__version__} pinched hierarchy k={k} m={m} t={t} symmetric={symmetric}",
    )
    eta = builder.add_scalar()
    if reduction is None:
        builder.add_block(n)
    else:
        for q in reduction.bases:
            builder.add_block(q.shape[1])

    # constraints are written against one n x n Gram block (index 0) first
    gram = 0
    rows: list[tuple[str, dict, float, str]] = []

    def entry(i: int, j: int, coeff: float) -> dict:
        return {("block", gram, i, j): coeff}

    # c_rep = sum over ordered pairs (i, j) with word rep of M_ij
    class_exprs: dict[Word, dict] = {}
    for rep, pairs in coefficients.items():
        expr: dict = {}
        for i, j in pairs:
            add_into(expr, block_entry_expr(gram, i, j))
        class_exprs[rep] = expr

    kept_reps = list(classes)
    if symmetric:
        seen: set = set()
        kept_reps = []
        for rep in classes:
            key = _class_orbit(rep)
            if key not in seen:
                seen.add(key)
                kept_reps.append(rep)

    n_zero = n_pinch = 0
    for rep in kept_reps:
        cls = classes[rep]
        if not cls.admissible:
            rows.append(("eq", class_exprs[rep], 0.0, f"zero{list(rep)}"))
            n_zero += 1
        elif cls.pinched:
            rows.append(("ineq", class_exprs[rep], 0.0, f"pinch{list(rep)}"))
            n_pinch += 1

    norm: dict = {}
    for (i, j), w in pair_words.items():
        coeff = _functional(classes, w, adjoint(w), lambda c: c.sigma) if i < j else _functional(
            classes, w, w, lambda c: c.sigma
        )
        if coeff:
            add_into(norm, entry(i, j, coeff))
    rows.append(("eq", norm, 1.0, "normalisation"))

    for x in range(1, k + 1) if not symmetric else (1,):
        marginal: dict = {}
        identity: dict = {}
        for (i, j), w in pair_words.items():
            w_ji = adjoint(w) if i < j else w
            c_total = _functional(classes, w, w_ji, lambda c: c.marginals[x - 1].cP + c.marginals[x - 1].cId)
            c_id = _functional(classes, w, w_ji, lambda c: c.marginals[x - 1].cId)
            if c_total:
                add_into(marginal, entry(i, j, c_total))
            if c_id:
                add_into(identity, entry(i, j, c_id))
        marginal[eta] = -1.0
        rows.append(("ineq", marginal, 0.0, f"marginal[{x}]"))
        rows.append(("ineq", identity, 0.0, f"identity[{x}]"))

    for kind, expr, rhs, label in rows:
        if reduction is not None:
            expr = _reduce_expr(expr, reduction, n)
        if kind == "eq":
            builder.add_eq(expr, rhs, label)
        else:
            builder.add_ineq(expr, rhs, label)

    gram_parameters = len(pair_words) if reduction is None else reduction.n_orbits
    builder.maximize({eta: 1.0})
    builder.metadata.update(k=k, m=m, t=t, basis=n, symmetric=symmetric)
    problem = builder.build()
    stats = {
        "basis": n,
        "classes": len(classes),
        "zeroed": n_zero,
        "pinched": n_pinch,
        "gram_parameters": gram_parameters,
        "constraints": problem.n_constraints,
    }
    return HierarchyProblem(
        basis, m, pair_words, classes, coefficients, problem, symmetric, gram_parameters, eta, stats, reduction
    )


def build_hierarchy(k: int, m: int, t: int) -> HierarchyProblem:
    if m < 2:
        raise ValueError(f"need m >= 2, got {m}")
    basis = enumerate_basis(k, t)
    pair_words: dict[tuple[int, int], Word] = {}
    classes: dict[Word, WordClass] = {}
    coefficients: dict[Word, list[tuple[int, int]]] = {}
    n = len(basis)
    for i in range(n):
        for j in range(i, n):
            w = normalize(adjoint(basis.words[i]) + basis.words[j])
            pair_words[(i, j)] = w
            rep = canonical(w)
            if rep not in classes:
                classes[rep] = classify_word(rep, k, m)
            # ordered pairs (i, j) and (j, i) whose word is exactly rep
            hits = [w == rep] if i == j else [w == rep, adjoint(w) == rep]
            for _ in range(sum(hits)):
                coefficients.setdefault(rep, []).append((i, j))
    hp = _assemble(basis, m, pair_words, classes, coefficients, reduction=None)
    logger.info("Built hierarchy k=%d m=%d t=%d", k, m, t, extra={"stats": hp.stats})
    return hp


def symmetrize(hp: HierarchyProblem) -> HierarchyProblem:
    """Same program over Gram matrices invariant under letter permutations,
    block-diagonalised into one PSD block per isotypic component."""
    if hp.symmetric:
        return hp
    reduction = symmetry_reduction(hp.basis)
    reduced = _assemble(hp.basis, hp.m, hp.pair_words, hp.classes, hp.coefficients, reduction)
    logger.info(
        "Symmetrised hierarchy: %d -> %d Gram parameters, blocks %s",
        hp.gram_parameters,
        reduced.gram_parameters,
        reduced.problem.psd_blocks,
        extra={"constraints": [hp.problem.n_constraints, reduced.problem.n_constraints]},
    )
    return reduced


def solve_hierarchy(hp: HierarchyProblem, tol: float | None = None, *, backend: str | None = None) -> BoundResult:
    report = solve(hp.problem, tol, backend=backend)
    if not report.ok:
        raise SolverFailure(
            f"hierarchy k={hp.k} m={hp.m} t={hp.t} ended with status {report.status}: {report.message}",
            report=report,
            stats=hp.stats,
        )
    return BoundResult(
        report.objective,
        "hierarchy",
        "g",
        hp.k,
        hp.m,
        level=hp.t,
        params={**hp.stats, "symmetric": hp.symmetric, "status": report.status, "residual": report.residual},
    )


def solve_level(
    k: int,
    m: int,
    t: int,
    tol: float | None = None,
    *,
    symmetric: bool = False,
    backend: str | None = None,
) -> BoundResult:
    hp = build_hierarchy(k, m, t)
    if symmetric:
        hp = symmetrize(hp)
    return solve_hierarchy(hp, tol, backend=backend)
