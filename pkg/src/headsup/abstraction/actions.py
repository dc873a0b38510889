"""Betting abstraction: per-ordinal action menus and off-tree translation.

The default menus, by the action's ordinal within its round:

    1st-2nd:    F, C, 0.5P, P, 2P, 4P, A
    3rd-5th:    F, C,       P, 2P, 4P, A
    6th onward: F, C,                  A

A pot-fraction entry xP resolves to raise-to = call level + x * (pot
after a hypothetical call).  Entries below the minimum raise are dropped;
entries at or above the stack clamp to all-in and merge with A.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..hunl import Action, GameState, legal_actions

FOLD, CALL, ALLIN = "F", "C", "A"

_EARLY = (FOLD, CALL, 0.5, 1.0, 2.0, 4.0, ALLIN)
_MID = (FOLD, CALL, 1.0, 2.0, 4.0, ALLIN)
_LATE = (FOLD, CALL, ALLIN)


@dataclass(frozen=True)
class ActionMenuConfig:
    """Menus keyed by (round, ordinal band).  ``bands`` maps an inclusive
    ordinal threshold to a menu; the last band is open-ended."""

    bands: tuple = ((2, _EARLY), (5, _MID), (10**9, _LATE))

    @classmethod
    def table1(cls) -> "ActionMenuConfig":
        return cls()

    def menu_for(self, round: int, ordinal: int):
        """Menu tokens for the given action ordinal (1-based) of a round."""
        if ordinal < 1:
            raise ValueError("ordinals are 1-based")
        for limit, menu in self.bands:
            if ordinal <= limit:
                return menu
        return self.bands[-1][1]


def abstract_actions(s: GameState, menu: ActionMenuConfig | None = None) -> list[Action]:
    """Resolve the state's menu to concrete legal actions.

    Order: fold (when legal), call, raises ascending, all-in.  Duplicate
    amounts merge; every emitted raise satisfies the min-raise rule.
    """
    if s.is_terminal:
        raise ValueError("terminal state has no actions")
    menu = menu or ActionMenuConfig.table1()
    ordinal = len(s.history[s.round]) + 1
    tokens = menu.menu_for(s.round, ordinal)
    legal = legal_actions(s)

    call_level = s.call_level
    call_need = call_level - s.wagers[s.to_act]
    pot_after_call = s.pot + min(call_need, s.stacks[s.to_act])

    out: list[Action] = []
    if FOLD in tokens and legal.fold:
        out.append(Action.fold())
    out.append(Action.call())

    raises: list[int] = []
    want_allin = ALLIN in tokens and legal.allin
    if legal.raise_max is not None:
        for tok in tokens:
            if isinstance(tok, str):
                continue
            amount = call_level + int(round(tok * pot_after_call))
            if amount >= legal.raise_max:
                want_allin = True        # clamp to all-in, merged with A
            elif amount >= legal.raise_min:
                raises.append(amount)
            # below the min raise: dropped
    for amount in sorted(set(raises)):
        out.append(Action.raise_to(amount))
    if want_allin and legal.raise_max is not None:
        out.append(Action.allin())
    return out


def translate_action(x: float, lo: float, hi: float) -> tuple[float, float]:
    """Pseudo-harmonic mapping of a pot-normalized bet x between adjacent
    abstract sizes lo <= x <= hi: returns (P(lo), P(hi))."""
    if not lo <= x <= hi:
        raise ValueError(f"bet {x} outside [{lo}, {hi}]")
    if hi == lo:
        return (1.0, 0.0)
    p_lo = ((hi - x) * (1.0 + lo)) / ((hi - lo) * (1.0 + x))
    return (p_lo, 1.0 - p_lo)
