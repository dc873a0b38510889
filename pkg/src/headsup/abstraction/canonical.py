"""Suit-isomorphic canonicalization of (hole cards, board).

Two situations are equivalent when some permutation of the four suits
maps one to the other (hole cards unordered, flop cards unordered, turn
and river distinguished).  Preflop indices are dense in [0, 169); later
rounds use the packed canonical key itself as the index, with a dense
enumeration available for the flop on demand.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .. import fastcards
from ..cards import check_distinct
from ..hunl import FLOP, PREFLOP, RIVER, TURN

_ROUND_BY_BOARD = {0: PREFLOP, 3: FLOP, 4: TURN, 5: RIVER}


@dataclass(frozen=True)
class CanonicalIndex:
    round: int
    index: int


def _key(holes, board) -> int:
    h = np.asarray(holes, dtype=np.int64)
    b = np.asarray(board, dtype=np.int64)
    return int(fastcards.canonical_key(h, b))


def _build_preflop_keys() -> np.ndarray:
    keys = set()
    empty = np.zeros(0, dtype=np.int64)
    for a in range(52):
        for b in range(a + 1, 52):
            keys.add(int(fastcards.canonical_key(
                np.array([a, b], dtype=np.int64), empty)))
    return np.array(sorted(keys), dtype=np.int64)


PREFLOP_KEYS = _build_preflop_keys()


def preflop_class_count() -> int:
    return len(PREFLOP_KEYS)


def canonicalize(holes, board=()) -> CanonicalIndex:
    """Canonical index of (holes, board); equal for any joint suit
    permutation.  Preflop indices are dense in [0, 169); postflop the
    index is the packed canonical key."""
    if len(holes) != 2:
        raise ValueError("need exactly two hole cards")
    if len(board) not in _ROUND_BY_BOARD:
        raise ValueError(f"bad board size {len(board)}")
    check_distinct(list(holes) + list(board))
    rnd = _ROUND_BY_BOARD[len(board)]
    key = _key(holes, board)
    if rnd == PREFLOP:
        idx = int(np.searchsorted(PREFLOP_KEYS, key))
        return CanonicalIndex(PREFLOP, idx)
    return CanonicalIndex(rnd, key)


def canonical_board(board) -> int:
    """Canonical key of a board alone (no hole cards)."""
    check_distinct(board)
    return int(fastcards.canonical_board_key(np.asarray(board, dtype=np.int64)))


@lru_cache(maxsize=1)
def flop_board_classes() -> np.ndarray:
    """Sorted canonical keys of all distinct flop boards (1755 of them)."""
    keys = set()
    for flop in itertools.combinations(range(52), 3):
        keys.add(int(fastcards.canonical_board_key(
            np.asarray(flop, dtype=np.int64))))
    return np.array(sorted(keys), dtype=np.int64)


def flop_board_class_count() -> int:
    return len(flop_board_classes())


def preflop_index_table() -> np.ndarray:
    """(1326,) preflop canonical index per hole-pair index."""
    from ..cards import PAIR_CARDS

    out = np.empty(PAIR_CARDS.shape[0], dtype=np.int32)
    empty = np.zeros(0, dtype=np.int64)
    for k in range(PAIR_CARDS.shape[0]):
        key = int(fastcards.canonical_key(
            PAIR_CARDS[k].astype(np.int64), empty))
        out[k] = int(np.searchsorted(PREFLOP_KEYS, key))
    return out
