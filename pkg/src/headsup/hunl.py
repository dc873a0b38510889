"""Heads-up no-limit hold'em betting state machine.

States are immutable; ``apply_action`` returns a fresh state.  Seat 0 is
the small blind / button (acts first preflop, second postflop), seat 1
the big blind.  ``pot`` always means all chips committed so far including
the current round's wagers, so ``pot + stacks[0] + stacks[1]`` equals two
starting stacks at every state.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .cards import Deck, cards_str, check_distinct
from .evaluator import evaluate7

PREFLOP, FLOP, TURN, RIVER, TERMINAL = range(5)
ROUND_NAMES = ("preflop", "flop", "turn", "river", "terminal")
BOARD_SIZE = (0, 3, 4, 5)


@dataclass(frozen=True)
class RulesConfig:
    starting_stack: int = 20_000
    small_blind: int = 50
    big_blind: int = 100

    def __post_init__(self):
        if not (0 < self.small_blind < self.big_blind <= self.starting_stack):
            raise ValueError("need small blind < big blind <= starting stack")


@dataclass(frozen=True)
class Action:
    """One betting action.  ``amount`` is the raise-to total wager for
    kind "raise", and ignored otherwise."""

    kind: str
    amount: int = 0

    FOLD = "fold"
    CALL = "call"
    RAISE = "raise"
    ALLIN = "allin"

    @classmethod
    def fold(cls) -> "Action":
        return cls(cls.FOLD)

    @classmethod
    def call(cls) -> "Action":
        return cls(cls.CALL)

    @classmethod
    def raise_to(cls, amount: int) -> "Action":
        return cls(cls.RAISE, amount)

    @classmethod
    def allin(cls) -> "Action":
        return cls(cls.ALLIN)

    def __str__(self):
        if self.kind == self.RAISE:
            return f"raise:{self.amount}"
        return self.kind


class IllegalActionError(ValueError):
    pass


@dataclass(frozen=True)
class LegalActions:
    """Compact legal-move set: flags plus the raise-to interval.

    ``raise_min``/``raise_max`` are raise-to totals; ``raise_max`` is the
    all-in level, so ``Action.raise_to(raise_max)`` and ``Action.allin()``
    coincide.  When no raise is possible both are None.
    """

    fold: bool
    call: bool
    raise_min: int | None
    raise_max: int | None
    call_is_allin: bool = False

    @property
    def allin(self) -> bool:
        return self.raise_max is not None or self.call_is_allin

    def __contains__(self, a: Action) -> bool:
        if a.kind == Action.FOLD:
            return self.fold
        if a.kind == Action.CALL:
            return self.call
        if a.kind == Action.ALLIN:
            return self.allin
        if a.kind == Action.RAISE:
            return (
                self.raise_min is not None
                and self.raise_min <= a.amount <= self.raise_max
            )
        return False

    def __iter__(self):
        if self.fold:
            yield Action.fold()
        if self.call:
            yield Action.call()
        if self.raise_max is not None:
            yield Action.raise_to(self.raise_min)
            if self.raise_max > self.raise_min:
                yield Action.allin()


@dataclass(frozen=True)
class GameState:
    config: RulesConfig
    holes: tuple[tuple[int, int], tuple[int, int]]
    board5: tuple[int, int, int, int, int]
    round: int
    stacks: tuple[int, int]
    pot: int
    wagers: tuple[int, int]
    to_act: int
    last_raise_inc: int
    history: tuple[tuple[Action, ...], ...] = ((), (), (), ())
    folded: int | None = None

    @property
    def board(self) -> tuple[int, ...]:
        n = 5 if self.round == TERMINAL else BOARD_SIZE[self.round]
        if self.round == TERMINAL and self.folded is not None:
            n = BOARD_SIZE[self._fold_round]
        return self.board5[:n]

    @property
    def _fold_round(self) -> int:
        for r in range(3, -1, -1):
            if self.history[r]:
                return r
        return PREFLOP

    @property
    def is_terminal(self) -> bool:
        return self.round == TERMINAL

    @property
    def call_level(self) -> int:
        return max(self.wagers)

    def contributions(self) -> tuple[int, int]:
        s = self.config.starting_stack
        return (s - self.stacks[0], s - self.stacks[1])

    def __str__(self):
        return (
            f"{ROUND_NAMES[self.round]} pot={self.pot} board=[{cards_str(self.board)}]"
            f" wagers={self.wagers} stacks={self.stacks} to_act={self.to_act}"
        )


def new_hand(config: RulesConfig, deal) -> GameState:
    """Start a hand.  ``deal`` is a Deck, an int seed, or an explicit list
    of at least 9 cards (seat-0 holes, seat-1 holes, board)."""
    if isinstance(deal, Deck):
        deck = deal
    elif isinstance(deal, int):
        deck = Deck(seed=deal)
    else:
        check_distinct(deal)
        deck = Deck(cards=list(deal))
    h0 = tuple(deck.draw(2))
    h1 = tuple(deck.draw(2))
    board = tuple(deck.draw(5))
    sb, bb = config.small_blind, config.big_blind
    return GameState(
        config=config,
        holes=(h0, h1),
        board5=board,
        round=PREFLOP,
        stacks=(config.starting_stack - sb, config.starting_stack - bb),
        pot=sb + bb,
        wagers=(sb, bb),
        to_act=0,
        last_raise_inc=bb,
    )


def legal_actions(s: GameState) -> LegalActions:
    if s.is_terminal:
        raise ValueError("terminal state has no actions")
    p = s.to_act
    level = s.call_level
    need = level - s.wagers[p]
    my_max = s.wagers[p] + s.stacks[p]
    opp_allin = s.stacks[1 - p] == 0
    can_raise = not opp_allin and my_max > level
    raise_min = raise_max = None
    if can_raise:
        raise_max = my_max
        raise_min = min(level + max(s.last_raise_inc, s.config.big_blind), raise_max)
    return LegalActions(
        fold=need > 0,
        call=True,
        raise_min=raise_min,
        raise_max=raise_max,
        call_is_allin=need >= s.stacks[p],
    )


def apply_action(s: GameState, a: Action) -> GameState:
    """Apply a legal action, returning the successor state."""
    legal = legal_actions(s)
    if a not in legal:
        raise IllegalActionError(f"illegal action {a} at [{s}]")
    p = s.to_act
    level = s.call_level

    if a.kind == Action.ALLIN:
        if legal.raise_max is not None:
            a = Action.raise_to(legal.raise_max)
        else:
            a = Action.call()

    hist = list(s.history)
    hist[s.round] = hist[s.round] + (a,)
    hist = tuple(hist)

    if a.kind == Action.FOLD:
        return replace(s, round=TERMINAL, history=hist, folded=p, to_act=p)

    if a.kind == Action.CALL:
        pay = min(level - s.wagers[p], s.stacks[p])
        wagers = _bump(s.wagers, p, pay)
        stacks = _bump(s.stacks, p, -pay)
        nxt = replace(
            s, pot=s.pot + pay, wagers=wagers, stacks=stacks, history=hist
        )
        short_allin = stacks[p] == 0 and wagers[p] < level
        if short_allin or (wagers[0] == wagers[1] and len(hist[s.round]) >= 2):
            return _close_round(nxt)
        return replace(nxt, to_act=1 - p)

    # raise-to
    pay = a.amount - s.wagers[p]
    wagers = _bump(s.wagers, p, pay)
    stacks = _bump(s.stacks, p, -pay)
    return replace(
        s,
        pot=s.pot + pay,
        wagers=wagers,
        stacks=stacks,
        history=hist,
        to_act=1 - p,
        last_raise_inc=max(s.last_raise_inc, a.amount - level),
    )


def _bump(t: tuple[int, int], i: int, d: int) -> tuple[int, int]:
    out = list(t)
    out[i] += d
    return tuple(out)


def _close_round(s: GameState) -> GameState:
    someone_allin = s.stacks[0] == 0 or s.stacks[1] == 0
    if s.round == RIVER or someone_allin:
        return replace(s, round=TERMINAL, wagers=s.wagers)
    return replace(
        s,
        round=s.round + 1,
        wagers=(0, 0),
        to_act=1,
        last_raise_inc=0,
    )


def terminal_utility(s: GameState) -> tuple[int, int]:
    """Net chips won per seat; zero-sum, split pots divide evenly."""
    if not s.is_terminal:
        raise ValueError("state is not terminal")
    c0, c1 = s.contributions()
    risk = min(c0, c1)
    if s.folded is not None:
        winner = 1 - s.folded
    else:
        r0 = evaluate7(list(s.holes[0]) + list(s.board5))
        r1 = evaluate7(list(s.holes[1]) + list(s.board5))
        if r0 == r1:
            return (0, 0)
        winner = 0 if r0 > r1 else 1
    return (risk, -risk) if winner == 0 else (-risk, risk)
