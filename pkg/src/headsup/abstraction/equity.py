"""Hand equity vs a uniform random opponent: exhaustive and Monte Carlo.

Equity is win probability plus half the tie probability over uniform
board rollouts.  Exhaustive mode enumerates every completion and is
exact; it is available against a fixed opponent holding anywhere, and
against the uniform opponent from the flop on (the preflop uniform case
is out of reach by enumeration and must use Monte Carlo).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from ..cards import check_distinct
from ..evaluator import evaluate_many
from ..fastcards import canonical_key
from ..hunl import RIVER
from .canonical import CanonicalIndex, _ROUND_BY_BOARD

_EVAL_CHUNK = 200_000


@dataclass(frozen=True)
class SamplingPolicy:
    """How equity_histogram explores the next round.

    ``next_cards``: number of next-street cards sampled, 0 = all of them.
    ``rollouts``: Monte Carlo rollouts per sampled card, 0 = exhaustive.
    """

    next_cards: int = 0
    rollouts: int = 0
    seed: int = 0


def _remaining(dead: set[int]) -> list[int]:
    return [c for c in range(52) if c not in dead]


def _pair_equity_on_boards(holes, opp, boards: np.ndarray) -> float:
    """Mean win+tie/2 of holes vs opp over an (N, 5) board array."""
    n = boards.shape[0]
    mine = np.empty((n, 7), dtype=np.int64)
    theirs = np.empty((n, 7), dtype=np.int64)
    mine[:, :2] = holes
    theirs[:, :2] = opp
    mine[:, 2:] = boards
    theirs[:, 2:] = boards
    acc = 0.0
    for lo in range(0, n, _EVAL_CHUNK):
        hi = min(n, lo + _EVAL_CHUNK)
        rm = evaluate_many(mine[lo:hi])
        ro = evaluate_many(theirs[lo:hi])
        acc += float(np.sum(rm > ro)) + 0.5 * float(np.sum(rm == ro))
    return acc / n


def equity(holes, board=(), opponent=None, mode: str = "exhaustive",
           trials: int = 100_000, seed: int = 0) -> float:
    """Equity of ``holes`` on ``board`` vs ``opponent`` (None = uniform
    random holding).  ``mode`` is "exhaustive" or "monte-carlo"."""
    holes = list(holes)
    board = list(board)
    if len(board) not in _ROUND_BY_BOARD:
        raise ValueError(f"bad board size {len(board)}")
    dead = holes + board + (list(opponent) if opponent is not None else [])
    check_distinct(dead)

    if mode == "exhaustive":
        return _equity_exhaustive(holes, board, opponent)
    if mode == "monte-carlo":
        return _equity_mc(holes, board, opponent, trials, seed)
    raise ValueError(f"unknown mode {mode!r}")


def _equity_exhaustive(holes, board, opponent) -> float:
    need = 5 - len(board)
    if opponent is not None:
        rem = _remaining(set(holes) | set(board) | set(opponent))
        if need == 0:
            boards = np.array([board], dtype=np.int64)
        else:
            combos = itertools.combinations(rem, need)
            boards = np.array([board + list(c) for c in combos], dtype=np.int64)
        return _pair_equity_on_boards(np.array(holes), np.array(opponent), boards)
    if len(board) == 0:
        raise ValueError(
            "preflop equity vs a uniform opponent is too large to enumerate;"
            " use monte-carlo or fix the opponent holding")
    rem = _remaining(set(holes) | set(board))
    total = 0.0
    count = 0
    for opp in itertools.combinations(rem, 2):
        rem2 = [c for c in rem if c not in opp]
        if need == 0:
            boards = np.array([board], dtype=np.int64)
        else:
            combos = itertools.combinations(rem2, need)
            boards = np.array([board + list(c) for c in combos], dtype=np.int64)
        total += _pair_equity_on_boards(np.array(holes), np.array(opp), boards)
        count += 1
    return total / count


def _equity_mc(holes, board, opponent, trials, seed) -> float:
    rng = np.random.default_rng(seed)
    dead = list(holes) + list(board) + (list(opponent) if opponent else [])
    rem = np.array(_remaining(set(dead)), dtype=np.int64)
    need = 5 - len(board)
    draw = need + (0 if opponent is not None else 2)
    if draw == 0:
        return _pair_equity_on_boards(
            np.array(holes), np.array(opponent), np.array([board], dtype=np.int64))
    acc = 0.0
    done = 0
    while done < trials:
        n = min(trials - done, _EVAL_CHUNK // 4)
        # vectorized distinct draws: random matrix argsort = permutations
        u = rng.random((n, rem.size))
        picks = rem[np.argsort(u, axis=1)[:, :draw]]
        if opponent is None:
            opp = picks[:, :2]
            rolled = picks[:, 2:]
        else:
            opp = np.broadcast_to(np.array(opponent, dtype=np.int64), (n, 2))
            rolled = picks
        boards = np.empty((n, 5), dtype=np.int64)
        boards[:, : len(board)] = board
        if need:
            boards[:, len(board):] = rolled
        mine = np.hstack([np.broadcast_to(np.array(holes, dtype=np.int64), (n, 2)), boards])
        theirs = np.hstack([opp, boards])
        rm = evaluate_many(mine)
        ro = evaluate_many(theirs)
        acc += float(np.sum(rm > ro)) + 0.5 * float(np.sum(rm == ro))
        done += n
    return acc / trials


def equity_histogram(holes, board=(), bins: int = 50,
                     policy: SamplingPolicy = SamplingPolicy()) -> np.ndarray:
    """Distribution of next-round equities as a normalized histogram.

    Sampling (both of next cards and of rollouts) is seeded from the
    canonical key, so suit-isomorphic inputs get identical histograms.
    Undefined on the river, which uses scalar equity instead.
    """
    holes = list(holes)
    board = list(board)
    if len(board) not in _ROUND_BY_BOARD or _ROUND_BY_BOARD[len(board)] == RIVER:
        raise ValueError("histograms are defined before the river only")
    check_distinct(holes + board)
    key = int(canonical_key(np.asarray(holes, dtype=np.int64),
                            np.asarray(board, dtype=np.int64)))
    rng = np.random.default_rng((key * 0x9E3779B97F4A7C15 + policy.seed) % (1 << 63))

    if len(board) == 0:
        rem = _remaining(set(holes))
        all_next = list(itertools.combinations(rem, 3))
    else:
        rem = _remaining(set(holes) | set(board))
        all_next = [(c,) for c in rem]
    if policy.next_cards and policy.next_cards < len(all_next):
        idx = rng.choice(len(all_next), size=policy.next_cards, replace=False)
        chosen = [all_next[i] for i in sorted(idx)]
    else:
        chosen = all_next

    hist = np.zeros(bins)
    for nxt in chosen:
        nb = board + list(nxt)
        if policy.rollouts:
            e = _equity_mc(holes, nb, None, policy.rollouts,
                           int(rng.integers(0, 2**31)))
        else:
            e = _equity_exhaustive(holes, nb, None)
        b = min(int(e * bins), bins - 1)
        hist[b] += 1.0
    return hist / hist.sum()
