"""Seven-card hand evaluation.

A hand rank is a single comparable integer: higher wins, equal 7-card
sets always rank equal.  The category (high card .. straight flush)
occupies the top bits and the tiebreak ranks the lower nibbles, so the
integer order matches standard poker ranking.
"""

from __future__ import annotations

import numpy as np

from . import fastcards
from .cards import check_distinct

CATEGORY_NAMES = (
    "high-card",
    "pair",
    "two-pair",
    "trips",
    "straight",
    "flush",
    "full-house",
    "quads",
    "straight-flush",
)


def evaluate7(cards) -> int:
    """Rank 7 distinct cards; equals the best of the 21 five-card sub-hands."""
    if len(cards) != 7:
        raise ValueError(f"expected 7 cards, got {len(cards)}")
    check_distinct(cards)
    return int(fastcards.eval_hand(np.asarray(cards, dtype=np.int64)))


def evaluate5(cards) -> int:
    """Rank a 5-card hand under standard poker ranking."""
    if len(cards) != 5:
        raise ValueError(f"expected 5 cards, got {len(cards)}")
    check_distinct(cards)
    return int(fastcards.eval_hand(np.asarray(cards, dtype=np.int64)))


def evaluate_many(hands: np.ndarray) -> np.ndarray:
    """Rank each row of an (N, K) array of cards, K in 5..7.  No validation."""
    hands = np.ascontiguousarray(hands, dtype=np.int64)
    return fastcards.eval_hands(hands)


def hand_category(rank: int) -> int:
    """Category ordinal 0..8 of a hand rank."""
    return rank >> 20


def category_name(rank: int) -> str:
    return CATEGORY_NAMES[rank >> 20]
