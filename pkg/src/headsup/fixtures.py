"""Small solved-game fixtures: Kuhn poker and Leduc hold'em.

Both are expressed as public game trees over single-card private hands,
with utilities in antes.  They are the desk-scale verification targets
for the solver and the subgame machinery.

Kuhn: 3 cards (J, Q, K), ante 1, one betting round, bet size 1.
Leduc: 6 cards (two suits of J, Q, K), ante 1, two rounds with a public
board card between them, bet sizes 2 then 4, at most two wagers per
round (a bet and one raise), first player acts first in both rounds.
"""

from __future__ import annotations

import numpy as np

from .efg import GameTree

KUHN_VALUE_P0 = -1.0 / 18.0  # first player's equilibrium value, antes/hand


def make_fixture(name: str) -> GameTree:
    if name == "kuhn":
        return make_kuhn()
    if name == "leduc":
        return make_leduc()
    raise ValueError(f"unknown fixture {name!r}")


def make_kuhn() -> GameTree:
    labels = ["J", "Q", "K"]
    hands = [[0], [1], [2]]
    t = GameTree(hands, hands, labels, labels,
                 w0=[1 / 3] * 3, w1=[1 / 2] * 3, n_cards=3)
    strengths = [0.0, 1.0, 2.0]

    root = t.decision(0, "", 0, ["check", "bet"])
    after_check = t.decision(1, "k", 0, ["check", "bet"])
    after_bet = t.decision(1, "b", 0, ["fold", "call"])
    t.add_child(root, after_check)
    t.add_child(root, after_bet)

    t.add_child(after_check, t.terminal_showdown("kk", 0, 1.0, strengths, strengths))
    check_bet = t.decision(0, "kb", 0, ["fold", "call"])
    t.add_child(after_check, check_bet)
    t.add_child(check_bet, t.terminal_fold("kbf", 0, winner=1, stake=1.0))
    t.add_child(check_bet, t.terminal_showdown("kbc", 0, 2.0, strengths, strengths))

    t.add_child(after_bet, t.terminal_fold("bf", 0, winner=0, stake=1.0))
    t.add_child(after_bet, t.terminal_showdown("bc", 0, 2.0, strengths, strengths))
    return t


LEDUC_CARDS = ["Js", "Jh", "Qs", "Qh", "Ks", "Kh"]
_LEDUC_BETS = (2.0, 4.0)
_LEDUC_MAX_WAGERS = 2


def _leduc_strengths(board_card: int) -> list[float]:
    board_rank = board_card >> 1
    out = []
    for c in range(6):
        rank = c >> 1
        out.append(100.0 + rank if rank == board_rank else float(rank))
    return out


def make_leduc() -> GameTree:
    hands = [[c] for c in range(6)]
    t = GameTree(hands, hands, LEDUC_CARDS, LEDUC_CARDS,
                 w0=[1 / 6] * 6, w1=[1 / 5] * 6, n_cards=6)

    def build_round(label: str, rnd: int, player: int, contrib: tuple,
                    pending: float, wagers: int, strengths) -> int:
        """Build the betting subtree at one state; returns its node id.

        ``contrib`` holds each player's committed antes so far, ``pending``
        the outstanding bet the mover must match, ``wagers`` the count of
        bets so far this round.
        """
        bet = _LEDUC_BETS[rnd]
        me, opp = contrib[player], contrib[1 - player]
        actions = []
        if pending > 0:
            actions.append("fold")
        actions.append("call" if pending > 0 else "check")
        if wagers < _LEDUC_MAX_WAGERS:
            actions.append("raise" if pending > 0 else "bet")
        node = t.decision(player, label, rnd, actions)

        if pending > 0:
            t.add_child(node, t.terminal_fold(label + "f", rnd,
                                              winner=1 - player, stake=me))
        # call / check
        called = _bump(contrib, player, pending)
        tag = "c" if pending > 0 else "k"
        if pending == 0 and _is_round_open(label):
            # first check keeps the round open
            child = build_round(label + "k", rnd, 1 - player, called,
                                0.0, wagers, strengths)
            t.add_child(node, child)
        else:
            t.add_child(node, _round_over(label + tag, rnd, called, strengths))
        if wagers < _LEDUC_MAX_WAGERS:
            raised = _bump(called, player, bet)
            child = build_round(label + ("r" if pending > 0 else "b"), rnd,
                                1 - player, raised, bet, wagers + 1, strengths)
            t.add_child(node, child)
        return node

    def _is_round_open(label: str) -> bool:
        # open = nobody has acted this round yet
        return label == "" or label.endswith(":")

    def _round_over(label: str, rnd: int, contrib: tuple, strengths) -> int:
        if rnd == 1:
            stake = contrib[0]
            assert contrib[0] == contrib[1]
            return t.terminal_showdown(label, 1, stake, strengths, strengths)
        chance = t.chance(label + "/", 1)
        for b in range(6):
            sub = build_round(f"{label}/{LEDUC_CARDS[b]}:", 1, 0, contrib,
                              0.0, 0, _leduc_strengths(b))
            t.add_child(chance, sub, weight=0.25, deal_card=b)
        return chance

    build_round("", 0, 0, (1.0, 1.0), 0.0, 0, None)
    return t


def _bump(contrib: tuple, player: int, amount: float) -> tuple:
    out = list(contrib)
    out[player] += amount
    return tuple(out)
