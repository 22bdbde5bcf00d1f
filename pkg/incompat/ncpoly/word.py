"""Words over the projector alphabet {1..k}.

A word (x_1, ..., x_l) stands for P_{j_x1|x1} ... P_{j_xl|xl} for one outcome
tuple j. Projectors are idempotent and Hermitian, so adjacent repeats merge and
reversal is the adjoint.
"""

from __future__ import annotations

from typing import Iterable

Word = tuple[int, ...]

EMPTY: Word = ()


def normalize(letters: Iterable[int]) -> Word:
    out: list[int] = []
    for letter in letters:
        if not out or out[-1] != letter:
            out.append(letter)
    return tuple(out)


def adjoint(w: Word) -> Word:
    return w[::-1]


def is_normal(w: Word) -> bool:
    return all(a != b for a, b in zip(w, w[1:]))


def is_palindrome(w: Word) -> bool:
    return w == w[::-1]


def canonical(w: Word) -> Word:
    """Representative of {w, adjoint(w)}."""
    return min(w, adjoint(w))


def check_letters(w: Word, k: int) -> None:
    bad = [x for x in w if not 1 <= x <= k]
    if bad:
        raise ValueError(f"letters {bad} outside 1..{k}")


def format_word(w: Word) -> str:
    return "[" + ",".join(str(x) for x in w) + "]"
