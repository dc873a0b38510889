"""Numba-compiled card routines shared by the evaluator, abstraction, and
training kernels: hand evaluation, suit-isomorphic canonical keys, and a
small deterministic RNG usable inside nopython code.

Everything here operates on integer card encodings (rank*4 + suit).
"""

from __future__ import annotations

import itertools

import numpy as np
from numba import njit


def _build_straight_table() -> np.ndarray:
    """Highest straight top-rank for each 13-bit rank mask, -1 if none.

    Bit r of the mask is rank r (0=deuce .. 12=ace).  The ace also plays
    low in the wheel (A2345, top rank index 3).
    """
    tab = np.full(8192, -1, dtype=np.int8)
    for mask in range(8192):
        ext = ((mask << 1) | ((mask >> 12) & 1)) & 0x3FFF
        for high in range(12, 2, -1):
            if (ext >> (high - 3)) & 0x1F == 0x1F:
                tab[mask] = high
                break
    return tab


STRAIGHT_HIGH = _build_straight_table()

# All 24 suit permutations, used for canonicalization.
SUIT_PERMS = np.array(list(itertools.permutations(range(4))), dtype=np.int8)

# Hand categories, low to high.
CAT_HIGH = 0
CAT_PAIR = 1
CAT_TWO_PAIR = 2
CAT_TRIPS = 3
CAT_STRAIGHT = 4
CAT_FLUSH = 5
CAT_FULL_HOUSE = 6
CAT_QUADS = 7
CAT_STRAIGHT_FLUSH = 8


@njit(cache=True)
def eval_hand(cards):
    """Rank a hand of 5..7 distinct cards as a single comparable integer.

    Layout: category in bits 20+, then up to five tiebreak ranks packed
    4 bits each, highest first.  Larger is better; equal 7-card sets
    always produce equal keys.  Allocation-free: rank counts live in
    nibbles of one word, suit masks in 16-bit lanes of another.
    """
    rank_nib = np.int64(0)   # 4-bit count per rank
    suit_nib = np.int64(0)   # 4-bit count per suit
    suit_lane = np.int64(0)  # 16-bit rank-mask lane per suit
    mask = np.int64(0)
    for i in range(cards.shape[0]):
        c = cards[i]
        r = c >> 2
        s = c & 3
        rank_nib += np.int64(1) << (4 * r)
        suit_nib += np.int64(1) << (4 * s)
        suit_lane |= np.int64(1) << (16 * s + r)
        mask |= np.int64(1) << r

    for s in range(4):
        if (suit_nib >> (4 * s)) & 15 >= 5:
            fm = (suit_lane >> (16 * s)) & 0x1FFF
            sh = STRAIGHT_HIGH[fm]
            if sh >= 0:
                return (CAT_STRAIGHT_FLUSH << 20) | (sh << 16)
            key = CAT_FLUSH << 20
            shift = 16
            n = 0
            for r in range(12, -1, -1):
                if fm & (np.int64(1) << r):
                    key |= r << shift
                    shift -= 4
                    n += 1
                    if n == 5:
                        break
            return key

    quad = -1
    trips1 = -1
    trips2 = -1
    pair1 = -1
    pair2 = -1
    for r in range(12, -1, -1):
        c = (rank_nib >> (4 * r)) & 15
        if c == 4:
            quad = r
        elif c == 3:
            if trips1 < 0:
                trips1 = r
            elif trips2 < 0:
                trips2 = r
        elif c == 2:
            if pair1 < 0:
                pair1 = r
            elif pair2 < 0:
                pair2 = r

    if quad >= 0:
        kick = -1
        for r in range(12, -1, -1):
            if r != quad and (rank_nib >> (4 * r)) & 15 > 0:
                kick = r
                break
        return (CAT_QUADS << 20) | (quad << 16) | (kick << 12)

    if trips1 >= 0 and (trips2 >= 0 or pair1 >= 0):
        pr = trips2 if trips2 > pair1 else pair1
        return (CAT_FULL_HOUSE << 20) | (trips1 << 16) | (pr << 12)

    sh = STRAIGHT_HIGH[mask]
    if sh >= 0:
        return (CAT_STRAIGHT << 20) | (sh << 16)

    if trips1 >= 0:
        key = (CAT_TRIPS << 20) | (trips1 << 16)
        shift = 12
        n = 0
        for r in range(12, -1, -1):
            if r != trips1 and (rank_nib >> (4 * r)) & 15 > 0:
                key |= r << shift
                shift -= 4
                n += 1
                if n == 2:
                    break
        return key

    if pair2 >= 0:
        kick = -1
        for r in range(12, -1, -1):
            if r != pair1 and r != pair2 and (rank_nib >> (4 * r)) & 15 > 0:
                kick = r
                break
        return (CAT_TWO_PAIR << 20) | (pair1 << 16) | (pair2 << 12) | (kick << 8)

    if pair1 >= 0:
        key = (CAT_PAIR << 20) | (pair1 << 16)
        shift = 12
        n = 0
        for r in range(12, -1, -1):
            if r != pair1 and (rank_nib >> (4 * r)) & 15 > 0:
                key |= r << shift
                shift -= 4
                n += 1
                if n == 3:
                    break
        return key

    key = CAT_HIGH << 20
    shift = 16
    n = 0
    for r in range(12, -1, -1):
        if (rank_nib >> (4 * r)) & 15 > 0:
            key |= r << shift
            shift -= 4
            n += 1
            if n == 5:
                break
    return key


@njit(cache=True)
def eval_hands(hands):
    """Rank each row of an (N, K) card array."""
    out = np.empty(hands.shape[0], dtype=np.int64)
    for i in range(hands.shape[0]):
        out[i] = eval_hand(hands[i])
    return out


@njit(cache=True)
def canonical_key(holes, board):
    """Minimal packed encoding of (holes, board) over all 24 suit permutations.

    Hole cards are unordered; the three flop cards are unordered; turn and
    river stay distinguished.  Cards pack 6 bits each, the board size tags
    the top bits so keys from different rounds never collide.
    """
    nb = board.shape[0]
    best = np.int64(0x7FFFFFFFFFFFFFFF)
    buf = np.empty(7, dtype=np.int64)
    for p in range(SUIT_PERMS.shape[0]):
        h0 = (holes[0] >> 2) * 4 + SUIT_PERMS[p, holes[0] & 3]
        h1 = (holes[1] >> 2) * 4 + SUIT_PERMS[p, holes[1] & 3]
        if h0 < h1:
            buf[0] = h1
            buf[1] = h0
        else:
            buf[0] = h0
            buf[1] = h1
        nflop = 3 if nb >= 3 else 0
        for i in range(nflop):
            c = (board[i] >> 2) * 4 + SUIT_PERMS[p, board[i] & 3]
            j = 2 + i
            while j > 2 and buf[j - 1] < c:
                buf[j] = buf[j - 1]
                j -= 1
            buf[j] = c
        for i in range(nflop, nb):
            buf[2 + i] = (board[i] >> 2) * 4 + SUIT_PERMS[p, board[i] & 3]
        key = np.int64(nb)
        for i in range(2 + nb):
            key = (key << 6) | buf[i]
        if key < best:
            best = key
    return best


@njit(cache=True)
def canonical_board_key_perm(board):
    """Canonical key of a board alone plus the index of a minimizing suit
    permutation (flop cards unordered)."""
    nb = board.shape[0]
    best = np.int64(0x7FFFFFFFFFFFFFFF)
    best_p = 0
    buf = np.empty(5, dtype=np.int64)
    for p in range(SUIT_PERMS.shape[0]):
        nflop = 3 if nb >= 3 else 0
        n = 0
        for i in range(nflop):
            c = (board[i] >> 2) * 4 + SUIT_PERMS[p, board[i] & 3]
            j = n
            while j > 0 and buf[j - 1] < c:
                buf[j] = buf[j - 1]
                j -= 1
            buf[j] = c
            n += 1
        for i in range(nflop, nb):
            buf[n] = (board[i] >> 2) * 4 + SUIT_PERMS[p, board[i] & 3]
            n += 1
        key = np.int64(nb)
        for i in range(n):
            key = (key << 6) | buf[i]
        if key < best:
            best = key
            best_p = p
    return best, best_p


@njit(cache=True)
def canonical_board_key(board):
    """Like canonical_key but for a board alone (flop cards unordered)."""
    key, _ = canonical_board_key_perm(board)
    return key


def unpack_board_key(key: int, n_cards: int) -> list:
    """Decode the representative board cards from a board-only key."""
    cards = []
    for _ in range(n_cards):
        cards.append(int(key & 0x3F))
        key >>= 6
    cards.reverse()
    return cards


# -- deterministic RNG for nopython kernels (splitmix64) --

SPLITMIX_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


@njit(cache=True)
def rng_next(state):
    """Advance a uint64[1] splitmix64 state and return the next draw."""
    state[0] += SPLITMIX_GAMMA
    z = state[0]
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


@njit(cache=True)
def rng_below(state, n):
    """Uniform draw in [0, n).  Modulo bias is negligible for small n."""
    return int(rng_next(state) % np.uint64(n))


@njit(cache=True)
def rng_uniform(state):
    """Uniform float64 in [0, 1)."""
    return float(rng_next(state) >> np.uint64(11)) * (1.0 / 9007199254740992.0)


@njit(cache=True)
def sample_cards(state, dead_mask, out):
    """Draw len(out) distinct cards avoiding dead ones (bitmask over 52)."""
    n = out.shape[0]
    drawn = dead_mask
    i = 0
    while i < n:
        c = rng_below(state, 52)
        bit = np.int64(1) << c
        if drawn & bit == 0:
            drawn |= bit
            out[i] = c
            i += 1
    return out
