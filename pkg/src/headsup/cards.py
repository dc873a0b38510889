"""Card primitives: 0..51 integer encoding, text parsing, deck dealing.

A card is ``rank * 4 + suit`` with rank 0..12 (deuce..ace) and suit 0..3
(clubs, diamonds, hearts, spades).  Text form is rank char + suit char,
e.g. "As", "Td", "2c"; boards and hole cards serialize as space-separated
lists of those.
"""

from __future__ import annotations

import numpy as np

RANK_CHARS = "23456789TJQKA"
SUIT_CHARS = "cdhs"

N_CARDS = 52
N_HOLE_PAIRS = 1326  # 52 choose 2


def make_card(rank: int, suit: int) -> int:
    if not (0 <= rank < 13 and 0 <= suit < 4):
        raise ValueError(f"bad rank/suit ({rank}, {suit})")
    return rank * 4 + suit


def rank_of(card: int) -> int:
    return card >> 2


def suit_of(card: int) -> int:
    return card & 3


def card_str(card: int) -> str:
    if not 0 <= card < N_CARDS:
        raise ValueError(f"bad card {card}")
    return RANK_CHARS[card >> 2] + SUIT_CHARS[card & 3]


def parse_card(text: str) -> int:
    text = text.strip()
    if len(text) != 2:
        raise ValueError(f"bad card text {text!r}")
    try:
        rank = RANK_CHARS.index(text[0].upper())
        suit = SUIT_CHARS.index(text[1].lower())
    except ValueError:
        raise ValueError(f"bad card text {text!r}") from None
    return make_card(rank, suit)


def cards_str(cards) -> str:
    return " ".join(card_str(c) for c in cards)


def parse_cards(text: str) -> list[int]:
    return [parse_card(tok) for tok in text.split()]


def check_distinct(cards) -> None:
    seen = set()
    for c in cards:
        if c in seen:
            raise ValueError(f"duplicate card {card_str(c)}")
        seen.add(c)


# Hole-pair indexing: pair (a, b) with a < b maps to a dense index in
# [0, 1326).  Used by ranges and subgame vectors.

_PAIR_INDEX = np.full((N_CARDS, N_CARDS), -1, dtype=np.int32)
_PAIR_CARDS = np.zeros((N_HOLE_PAIRS, 2), dtype=np.int8)
_k = 0
for _a in range(N_CARDS):
    for _b in range(_a + 1, N_CARDS):
        _PAIR_INDEX[_a, _b] = _PAIR_INDEX[_b, _a] = _k
        _PAIR_CARDS[_k, 0] = _a
        _PAIR_CARDS[_k, 1] = _b
        _k += 1


def pair_index(a: int, b: int) -> int:
    if a == b:
        raise ValueError("hole cards must differ")
    return int(_PAIR_INDEX[a, b])


def pair_cards(index: int) -> tuple[int, int]:
    a, b = _PAIR_CARDS[index]
    return int(a), int(b)


PAIR_CARDS = _PAIR_CARDS  # (1326, 2) int8 view for vectorized consumers
PAIR_INDEX = _PAIR_INDEX


def _build_pair_perms() -> np.ndarray:
    """(24, 1326) pair index after applying each suit permutation."""
    import itertools

    perms = list(itertools.permutations(range(4)))
    out = np.empty((24, N_HOLE_PAIRS), dtype=np.int32)
    for p, perm in enumerate(perms):
        a = (_PAIR_CARDS[:, 0].astype(np.int32) & ~3) | np.asarray(perm, dtype=np.int32)[_PAIR_CARDS[:, 0] & 3]
        b = (_PAIR_CARDS[:, 1].astype(np.int32) & ~3) | np.asarray(perm, dtype=np.int32)[_PAIR_CARDS[:, 1] & 3]
        out[p] = _PAIR_INDEX[a, b]
    return out


PAIR_PERMS = _build_pair_perms()


class Deck:
    """Deterministic deal source.

    Either seeded (shuffles the 52 cards with numpy's PCG64) or explicit
    (a fixed card list, validated for duplicates).
    """

    def __init__(self, seed: int | None = None, cards: list[int] | None = None):
        if cards is not None:
            check_distinct(cards)
            self._cards = list(cards)
        else:
            rng = np.random.default_rng(seed)
            order = rng.permutation(N_CARDS)
            self._cards = [int(c) for c in order]
        self._next = 0

    def draw(self, n: int) -> list[int]:
        if self._next + n > len(self._cards):
            raise ValueError("deck exhausted")
        out = self._cards[self._next : self._next + n]
        self._next += n
        return out
