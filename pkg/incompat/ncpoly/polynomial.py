from __future__ import annotations

from fractions import Fraction
from typing import Iterator, Mapping, Union

from incompat.ncpoly.word import EMPTY, Word, check_letters, format_word, normalize

Coeff = Union[Fraction, float, int]

MAX_POWER_OF_S = 4


def _clean(c: Coeff) -> Coeff:
    if isinstance(c, int):
        return Fraction(c)
    return c


class NCPolynomial:
    """Polynomial in k projector symbols with words kept in normal form.

    Numbers act as multiples of the identity (the empty word). Coefficients
    stay exact (Fraction) until a float enters the arithmetic.
    """

    __slots__ = ("k", "_terms")

    def __init__(self, terms: Mapping[Word, Coeff] | None = None, k: int = 1) -> None:
        if k < 1:
            raise ValueError(f"alphabet size must be >= 1, got {k}")
        self.k = k
        acc: dict[Word, Coeff] = {}
        for w, c in (terms or {}).items():
            w = normalize(w)
            check_letters(w, k)
            acc[w] = acc.get(w, 0) + _clean(c)
        self._terms = {w: c for w, c in sorted(acc.items(), key=lambda t: (len(t[0]), t[0])) if c != 0}

    @classmethod
    def constant(cls, c: Coeff, k: int) -> NCPolynomial:
        return cls({EMPTY: c}, k)

    @classmethod
    def letter(cls, x: int, k: int) -> NCPolynomial:
        return cls({(x,): 1}, k)

    @classmethod
    def S(cls, k: int) -> NCPolynomial:
        """S = P_1 + ... + P_k."""
        return cls({(x,): 1 for x in range(1, k + 1)}, k)

    @property
    def terms(self) -> dict[Word, Coeff]:
        return dict(self._terms)

    def items(self) -> Iterator[tuple[Word, Coeff]]:
        return iter(self._terms.items())

    def __len__(self) -> int:
        return len(self._terms)

    def __iter__(self) -> Iterator[Word]:
        return iter(self._terms)

    def __getitem__(self, w: Word) -> Coeff:
        return self._terms.get(normalize(w), 0)

    @property
    def degree(self) -> int:
        return max((len(w) for w in self._terms), default=0)

    def _coerce(self, other: NCPolynomial | Coeff) -> NCPolynomial:
        if isinstance(other, NCPolynomial):
            if other.k != self.k:
                raise ValueError(f"alphabet mismatch: {self.k} vs {other.k}")
            return other
        return NCPolynomial.constant(other, self.k)

    def __add__(self, other: NCPolynomial | Coeff) -> NCPolynomial:
        other = self._coerce(other)
        terms = dict(self._terms)
        for w, c in other.items():
            terms[w] = terms.get(w, 0) + c
        return NCPolynomial(terms, self.k)

    __radd__ = __add__

    def __neg__(self) -> NCPolynomial:
        return NCPolynomial({w: -c for w, c in self.items()}, self.k)

    def __sub__(self, other: NCPolynomial | Coeff) -> NCPolynomial:
        return self + (-self._coerce(other))

    def __rsub__(self, other: Coeff) -> NCPolynomial:
        return self._coerce(other) - self

    def __mul__(self, other: NCPolynomial | Coeff) -> NCPolynomial:
        other = self._coerce(other)
        terms: dict[Word, Coeff] = {}
        for u, a in self.items():
            for v, b in other.items():
                w = normalize(u + v)
                terms[w] = terms.get(w, 0) + a * b
        return NCPolynomial(terms, self.k)

    def __rmul__(self, other: Coeff) -> NCPolynomial:
        return self._coerce(other) * self

    def __pow__(self, p: int) -> NCPolynomial:
        if p < 0:
            raise ValueError("negative powers are undefined")
        out = NCPolynomial.constant(1, self.k)
        for _ in range(p):
            out = out * self
        return out

    def __eq__(self, other: object) -> bool:
        if isinstance(other, NCPolynomial):
            return self.k == other.k and self._terms == other._terms
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.k, tuple(self._terms.items())))

    def adjoint(self) -> NCPolynomial:
        return NCPolynomial({w[::-1]: c for w, c in self.items()}, self.k)

    def __repr__(self) -> str:
        if not self._terms:
            return "0"
        return " + ".join(f"{c}*{format_word(w)}" for w, c in self.items())


def expand_power_of_S(k: int, p: int) -> NCPolynomial:
    if not 0 <= p <= MAX_POWER_OF_S:
        raise ValueError(f"power must lie in 0..{MAX_POWER_OF_S}, got {p}")
    return NCPolynomial.S(k) ** p


def polynomial_in_S(coeffs: list[Coeff], k: int) -> NCPolynomial:
    """sum_p coeffs[p] S^p, lowest degree first."""
    S = NCPolynomial.S(k)
    out = NCPolynomial({}, k)
    power = NCPolynomial.constant(1, k)
    for c in coeffs:
        out = out + c * power
        power = power * S
    return out
