"""Batch hand-strength features, exact and suit-invariant by construction.

Everything is computed for all 1,326 hole pairs against a fixed board in
one pass, using strength sorting plus per-card counts instead of pairwise
loops.  Exactness matters: sampled features would break the guarantee
that suit-isomorphic hands land in the same bucket.

Per round the clustering features are:

  * river: exact equity vs a uniform opponent (scalar);
  * turn:  histogram over the 46 river cards of exact river equity;
  * flop:  histogram over the 47 turn cards of six-card showdown equity
           (showdown evaluated on the four-card board, a cheap stand-in
           for full-rollout equity at desk scale);
  * preflop: none (the 169 canonical classes are the buckets).
"""

from __future__ import annotations

import numpy as np
from numba import njit

from ..cards import PAIR_CARDS
from ..fastcards import eval_hand

N_PAIRS = 1326


@njit(cache=True)
def _pair_strengths(board, pair_cards, n_board_eval):
    """Hand rank per hole pair on ``board`` (first n_board_eval cards used);
    -1 for pairs colliding with the board."""
    out = np.full(N_PAIRS, -1.0)
    used = np.zeros(52, dtype=np.int8)
    for i in range(board.shape[0]):
        used[board[i]] = 1
    cards = np.empty(2 + n_board_eval, dtype=np.int64)
    for i in range(n_board_eval):
        cards[2 + i] = board[i]
    for k in range(N_PAIRS):
        a = pair_cards[k, 0]
        b = pair_cards[k, 1]
        if used[a] or used[b]:
            continue
        cards[0] = a
        cards[1] = b
        out[k] = eval_hand(cards)
    return out


@njit(cache=True)
def _equity_from_strengths(strengths, pair_cards, out):
    """Exact win + half-tie share vs a uniform compatible opponent pair,
    given per-pair strengths (-1 = blocked, written as -1 in out)."""
    order = np.argsort(strengths)
    n_valid = 0
    for k in range(N_PAIRS):
        if strengths[k] >= 0:
            n_valid += 1
    start = N_PAIRS - n_valid

    count_c = np.zeros(52, dtype=np.float64)   # valid pairs containing card
    for k in range(N_PAIRS):
        if strengths[k] >= 0:
            count_c[pair_cards[k, 0]] += 1.0
            count_c[pair_cards[k, 1]] += 1.0

    lt_tot = 0.0
    lt_c = np.zeros(52, dtype=np.float64)
    idx = start
    while idx < N_PAIRS:
        # strength group [idx, j)
        j = idx
        s = strengths[order[idx]]
        g_tot = 0.0
        g_c = np.zeros(52, dtype=np.float64)
        while j < N_PAIRS and strengths[order[j]] == s:
            k = order[j]
            g_tot += 1.0
            g_c[pair_cards[k, 0]] += 1.0
            g_c[pair_cards[k, 1]] += 1.0
            j += 1
        for t in range(idx, j):
            k = order[t]
            a = pair_cards[k, 0]
            b = pair_cards[k, 1]
            # k itself sits inside the per-card counts, so "+1" restores the
            # double-subtracted {a,b} pair and k is already excluded.
            wins = lt_tot - lt_c[a] - lt_c[b]
            ties = g_tot - g_c[a] - g_c[b] + 1.0
            opp = n_valid - count_c[a] - count_c[b] + 1.0
            out[k] = (wins + 0.5 * ties) / opp if opp > 0 else 0.5
        lt_tot += g_tot
        for c in range(52):
            lt_c[c] += g_c[c]
        idx = j
    for k in range(N_PAIRS):
        if strengths[k] < 0:
            out[k] = -1.0
    return out


@njit(cache=True)
def river_strengths_all(board5, pair_cards):
    """eval7 rank per hole pair on a 5-card board; -1 if blocked."""
    return _pair_strengths(board5, pair_cards, 5)


@njit(cache=True)
def river_equity_all(board5, pair_cards):
    """Exact river equity per hole pair; -1 if blocked."""
    s = _pair_strengths(board5, pair_cards, 5)
    out = np.empty(N_PAIRS)
    return _equity_from_strengths(s, pair_cards, out)


@njit(cache=True)
def turn_histograms_all(board4, pair_cards, bins):
    """(1326, bins) histogram over river cards of exact river equity."""
    out = np.zeros((N_PAIRS, bins))
    used = np.zeros(52, dtype=np.int8)
    for i in range(4):
        used[board4[i]] = 1
    board5 = np.empty(5, dtype=np.int64)
    for i in range(4):
        board5[i] = board4[i]
    eq = np.empty(N_PAIRS)
    counts = np.zeros(N_PAIRS)
    for c in range(52):
        if used[c]:
            continue
        board5[4] = c
        s = _pair_strengths(board5, pair_cards, 5)
        _equity_from_strengths(s, pair_cards, eq)
        for k in range(N_PAIRS):
            if eq[k] >= 0:
                bidx = int(eq[k] * bins)
                if bidx >= bins:
                    bidx = bins - 1
                out[k, bidx] += 1.0
                counts[k] += 1.0
    for k in range(N_PAIRS):
        if counts[k] > 0:
            for bidx in range(bins):
                out[k, bidx] /= counts[k]
        else:
            out[k, 0] = -1.0
    return out


@njit(cache=True)
def flop_histograms_all(board3, pair_cards, bins):
    """(1326, bins) histogram over turn cards of six-card showdown equity."""
    out = np.zeros((N_PAIRS, bins))
    used = np.zeros(52, dtype=np.int8)
    for i in range(3):
        used[board3[i]] = 1
    board4 = np.empty(4, dtype=np.int64)
    for i in range(3):
        board4[i] = board3[i]
    eq = np.empty(N_PAIRS)
    counts = np.zeros(N_PAIRS)
    for c in range(52):
        if used[c]:
            continue
        board4[3] = c
        s = _pair_strengths(board4, pair_cards, 4)
        _equity_from_strengths(s, pair_cards, eq)
        for k in range(N_PAIRS):
            if eq[k] >= 0:
                bidx = int(eq[k] * bins)
                if bidx >= bins:
                    bidx = bins - 1
                out[k, bidx] += 1.0
                counts[k] += 1.0
    for k in range(N_PAIRS):
        if counts[k] > 0:
            for bidx in range(bins):
                out[k, bidx] /= counts[k]
        else:
            out[k, 0] = -1.0
    return out


@njit(cache=True)
def nearest_centroid_cdf(feature_cdf, centroids):
    """Index of the L1-nearest centroid (ties to the lowest index)."""
    best = -1
    bestd = 1.0e300
    for c in range(centroids.shape[0]):
        d = 0.0
        for j in range(feature_cdf.shape[0]):
            diff = feature_cdf[j] - centroids[c, j]
            d += diff if diff >= 0 else -diff
        if d < bestd:
            bestd = d
            best = c
    return best


@njit(cache=True)
def assign_histograms(hists, centroids):
    """Batch nearest-centroid assignment of histogram rows (CDF transform
    applied here); rows with a leading -1 are blocked and get -1."""
    n, bins = hists.shape
    out = np.full(n, -1, dtype=np.int32)
    cdf = np.empty(bins)
    for i in range(n):
        if hists[i, 0] < 0:
            continue
        acc = 0.0
        for j in range(bins):
            acc += hists[i, j]
            cdf[j] = acc
        out[i] = nearest_centroid_cdf(cdf, centroids)
    return out


@njit(cache=True)
def assign_scalars(values, centroids):
    """Batch nearest-centroid assignment for 1-D features (river equity)."""
    n = values.shape[0]
    out = np.full(n, -1, dtype=np.int32)
    f = np.empty(1)
    for i in range(n):
        if values[i] < 0:
            continue
        f[0] = values[i]
        out[i] = nearest_centroid_cdf(f, centroids)
    return out
