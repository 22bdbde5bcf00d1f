"""
Summation calculus on projector words.

``sigma`` sums a word over every outcome index, ``sigma_x`` over every index
except j_x. The rules, tried in this order until the word is empty (or the
single letter x):

1. completeness: a letter y (y != x) occurring exactly once is summed out,
   sum_j P_j = 1, and the word is re-normalised;
2. ``mode="mub"``: the defining property of unbiased bases, P_a P_b P_a = P_a/d,
   rewrites a factor (a, b, a) to (a,) exactly;
3. ``mode="generic"`` (marginals only): pinching. A palindromic word in which
   y != x occurs exactly twice has the shape u^+ P_y M P_y u with M palindromic,
   hence PSD, and sum_j P_j M P_j >= M/m. This gives a lower bound only.

Indices never touched by a rule are summed trivially, a factor m each. The
reduction itself does not depend on k or m, so it is cached on the word alone.
A word and its adjoint have the same sums, so both are reduced through the
same representative.
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Literal

from incompat.ncpoly.word import Word, canonical, check_letters, format_word, is_palindrome, normalize

logger = logging.getLogger(__name__)

Mode = Literal["generic", "mub"]
MODES: tuple[str, ...] = ("generic", "mub")


@dataclass(frozen=True)
class Reduction:
    word: Word
    summed: frozenset[int]
    inverse_m: int
    used_pinch: bool


@dataclass(frozen=True)
class MarginalResult:
    cP: Fraction
    cId: Fraction
    used_pinch: bool = False

    @property
    def exact(self) -> bool:
        return not self.used_pinch


def _check_mode(mode: str) -> None:
    if mode not in MODES:
        raise ValueError(f"unknown rewriting mode {mode!r}; expected one of {MODES}")


@lru_cache(maxsize=None)
def reduce_word(w: Word, keep: int | None, mode: Mode) -> Reduction | None:
    word = normalize(w)
    summed: set[int] = set()
    inverse_m = 0
    used_pinch = False
    done = {(), (keep,)} if keep is not None else {()}

    while word not in done:
        counts = Counter(word)
        once = next((y for y in word if counts[y] == 1 and y != keep), None)
        if once is not None:
            word = normalize(letter for letter in word if letter != once)
            summed.add(once)
            continue

        if mode == "mub":
            at = next((i for i in range(len(word) - 2) if word[i] == word[i + 2]), None)
            if at is not None:
                logger.debug("unbiased collapse of %s at %d", format_word(word), at)
                word = normalize(word[: at + 1] + word[at + 3 :])
                inverse_m += 1
                continue
        elif keep is not None and is_palindrome(word):
            pinched = next((y for y in word if counts[y] == 2 and y != keep), None)
            if pinched is not None:
                logger.debug("pinching %s on letter %d", format_word(word), pinched)
                word = normalize(letter for letter in word if letter != pinched)
                summed.add(pinched)
                inverse_m += 1
                used_pinch = True
                continue

        return None

    return Reduction(word, frozenset(summed), inverse_m, used_pinch)


def is_normalisable(w: Word, k: int) -> bool:
    check_letters(w, k)
    return reduce_word(normalize(w), None, "generic") is not None


def sigma(w: Word, k: int, m: int, mode: Mode = "generic") -> Fraction | None:
    """Coefficient of the identity in sum_j w, or None when w does not reduce."""
    _check_mode(mode)
    check_letters(w, k)
    red = reduce_word(canonical(normalize(w)), None, mode)
    if red is None:
        return None
    return Fraction(m) ** (k - len(red.summed) - red.inverse_m)


def sigma_x(w: Word, x: int, k: int, m: int, mode: Mode = "generic") -> MarginalResult | None:
    """Marginal of w along x: sum over every index but j_x, as cP P_x + cId 1."""
    _check_mode(mode)
    check_letters(w, k)
    check_letters((x,), k)
    red = reduce_word(canonical(normalize(w)), x, mode)
    if red is None:
        return None
    value = Fraction(m) ** (k - 1 - len(red.summed) - red.inverse_m)
    if red.word:
        return MarginalResult(value, Fraction(0), red.used_pinch)
    return MarginalResult(Fraction(0), value, red.used_pinch)


def classify(w: Word, k: int, m: int, mode: Mode = "generic") -> tuple[Fraction | None, tuple[MarginalResult | None, ...]]:
    return sigma(w, k, m, mode), tuple(sigma_x(w, x, k, m, mode) for x in range(1, k + 1))
