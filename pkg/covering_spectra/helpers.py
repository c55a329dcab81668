"""Helpers for covering-spectra."""
from __future__ import annotations

import hashlib
import json
import logging
import sys
from functools import wraps
from typing import Any, Callable, ParamSpec

import numpy as np

from .const import EXIT_AMBIGUOUS, EXIT_BOUND_VIOLATED, EXIT_OK, EXIT_USAGE
from .exceptions import (
    AmbiguousCountError,
    BoundViolationError,
    CoveringError,
    InvalidWordError,
)

_LOGGER = logging.getLogger(__name__)

_P = ParamSpec("_P")

Word = tuple[int, ...]


# -- words -----------------------------------------------------------------


def validate_word(word: Word, rank: int) -> None:
    """Raise InvalidWordError if a letter is zero or above ``rank``."""
    for letter in word:
        if letter == 0 or abs(letter) > rank:
            raise InvalidWordError(f"letter {letter} outside generators 1..{rank}", tuple(word))


def free_reduce(word: Word) -> Word:
    out: list[int] = []
    for letter in word:
        if out and out[-1] == -letter:
            out.pop()
        else:
            out.append(letter)
    return tuple(out)


def is_reduced(word: Word) -> bool:
    return all(a != -b for a, b in zip(word, word[1:]))


def invert_word(word: Word) -> Word:
    return tuple(-letter for letter in reversed(word))


# -- permutations ----------------------------------------------------------


def compose(p: tuple[int, ...], q: tuple[int, ...]) -> tuple[int, ...]:
    """Apply p then q (right action): x -> q[p[x]]."""
    return tuple(q[y] for y in p)


def invert_perm(p: tuple[int, ...]) -> tuple[int, ...]:
    inv = [0] * len(p)
    for x, y in enumerate(p):
        inv[y] = x
    return tuple(inv)


def cyclic_power(n: int, k: int) -> tuple[int, ...]:
    """Sheet shift x -> x + k mod n."""
    return tuple((x + k) % n for x in range(n))


# -- reproducibility -------------------------------------------------------


def make_rng(seed: int | None) -> np.random.Generator:
    return np.random.default_rng(seed)


def canonical_json(data: Any) -> str:
    return json.dumps(data, sort_keys=True, separators=(",", ":"))


def stable_hash(data: Any) -> str:
    """SHA-256 of the canonical JSON of ``data``."""
    return hashlib.sha256(canonical_json(data).encode("utf-8")).hexdigest()


# -- process boundary ------------------------------------------------------


def exit_code_for(err: CoveringError) -> int:
    if isinstance(err, BoundViolationError):
        return EXIT_BOUND_VIOLATED
    if isinstance(err, AmbiguousCountError):
        return EXIT_AMBIGUOUS
    return EXIT_USAGE


def cli_command(func: Callable[_P, int]) -> Callable[_P, int]:
    """Decorate a CLI handler so domain errors become exit codes.

    CoveringError subtypes are reported on stderr and translated by
    exit_code_for. Programming errors are not caught.
    """

    @wraps(func)
    def wrapper(*args: _P.args, **kwargs: _P.kwargs) -> int:
        try:
            result = func(*args, **kwargs)
        except CoveringError as err:
            code = exit_code_for(err)
            _LOGGER.debug("%s failed with %s (exit %d)", func.__name__, type(err).__name__, code)
            print(f"error: {err}", file=sys.stderr)
            return code
        return EXIT_OK if result is None else int(result)

    return wrapper
