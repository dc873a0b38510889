"""Belief tracking over private hands.

A range is a probability vector over hole holdings (1,326 pairs for
hold'em, single cards for the small fixtures): non-negative, zero on
holdings that collide with visible cards, and normalized unless a caller
explicitly works with unnormalized reach weights.
"""

from __future__ import annotations

import numpy as np

from ..cards import N_HOLE_PAIRS, PAIR_CARDS


class RangeCollapse(ValueError):
    """Observed action has probability zero under the whole range: the
    opponent model is violated and the caller should fall back."""


class Range:
    """Probability vector over hole pairs, blocker-consistent."""

    def __init__(self, weights: np.ndarray, normalized: bool = True):
        self.weights = np.asarray(weights, dtype=np.float64).copy()
        if np.any(self.weights < 0):
            raise ValueError("range weights must be non-negative")
        if normalized:
            self.normalize()

    @classmethod
    def uniform_hunl(cls, dead_cards=()) -> "Range":
        w = np.ones(N_HOLE_PAIRS)
        r = cls(w, normalized=False)
        r.remove_cards(dead_cards)
        r.normalize()
        return r

    def remove_cards(self, cards) -> "Range":
        """Zero every pair containing any of ``cards``; renormalizes."""
        if len(self.weights) != N_HOLE_PAIRS:
            raise ValueError("card removal applies to hole-pair ranges")
        for c in cards:
            hit = (PAIR_CARDS[:, 0] == c) | (PAIR_CARDS[:, 1] == c)
            self.weights[hit] = 0.0
        if self.weights.sum() > 0:
            self.normalize()
        return self

    def normalize(self) -> "Range":
        tot = self.weights.sum()
        if tot <= 0:
            raise RangeCollapse("range has no mass")
        self.weights /= tot
        return self

    @property
    def support(self) -> np.ndarray:
        return np.where(self.weights > 0)[0]

    def copy(self) -> "Range":
        return Range(self.weights, normalized=False)


def update_range(prior: np.ndarray, action_probs: np.ndarray) -> np.ndarray:
    """Bayes update: posterior proportional to prior times the probability
    each holding takes the observed action.  Raises RangeCollapse when
    the observation has zero mass under the prior."""
    prior = np.asarray(prior, dtype=np.float64)
    action_probs = np.asarray(action_probs, dtype=np.float64)
    post = prior * action_probs
    tot = post.sum()
    if tot <= 0:
        raise RangeCollapse("observed action has probability 0 under the range")
    return post / tot


def update_range_or_uniform(prior: np.ndarray, action_probs: np.ndarray,
                            on_collapse=None) -> np.ndarray:
    """update_range with the spec'd fallback: uniform over the prior's
    support on collapse (logged via ``on_collapse`` when provided)."""
    try:
        return update_range(prior, action_probs)
    except RangeCollapse:
        if on_collapse is not None:
            on_collapse()
        support = np.asarray(prior) > 0
        out = np.zeros_like(np.asarray(prior, dtype=np.float64))
        out[support] = 1.0 / support.sum()
        return out


def sharpen(weights: np.ndarray) -> np.ndarray:
    """Square and renormalize: concentrates mass on likely holdings."""
    w = np.asarray(weights, dtype=np.float64) ** 2
    tot = w.sum()
    if tot <= 0:
        raise RangeCollapse("cannot sharpen an empty range")
    return w / tot


def flatten(weights: np.ndarray) -> np.ndarray:
    """Uniform over the support."""
    w = np.asarray(weights, dtype=np.float64)
    support = w > 0
    if not support.any():
        raise RangeCollapse("cannot flatten an empty range")
    out = np.zeros_like(w)
    out[support] = 1.0 / support.sum()
    return out


def apply_transform(weights: np.ndarray, name: str) -> np.ndarray:
    if name == "identity":
        return np.asarray(weights, dtype=np.float64).copy()
    if name == "sharpen":
        return sharpen(weights)
    if name == "flatten":
        return flatten(weights)
    raise ValueError(f"unknown range transform {name!r}")
