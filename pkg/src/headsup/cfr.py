"""Regret-minimization solving over public game trees.

The solver family: full-width vanilla CFR with alternating updates,
external-sampling MCCFR, both with uniform or linear (iteration-t)
weighting of regret and average-strategy contributions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import vecfr
from .efg import DECISION, GameTree
from .fastcards import SPLITMIX_GAMMA

VANILLA = "vanilla"
EXTERNAL_SAMPLING = "external-sampling"
UNIFORM = "uniform"
LINEAR = "linear"


def regret_matching(regrets) -> np.ndarray:
    """Distribution proportional to positive regrets; uniform when none."""
    r = np.asarray(regrets, dtype=np.float64)
    if r.size == 0:
        raise ValueError("empty regret vector")
    pos = np.clip(r, 0.0, None)
    tot = pos.sum()
    if tot <= 0.0:
        return np.full(r.size, 1.0 / r.size)
    return pos / tot


class Workspace:
    """Reusable scratch buffers for one tree's kernels."""

    def __init__(self, tree: GameTree):
        flat = tree.flat()
        n = flat.kind.shape[0]
        n0 = flat.hands0.shape[0]
        n1 = flat.hands1.shape[0]
        nmax = max(n0, n1)
        self.r0 = np.zeros((n, n0))
        self.r1 = np.zeros((n, n1))
        self.rc = np.zeros(n)
        self.vbuf = np.zeros((n, nmax))
        self.pc = np.zeros(flat.n_cards)
        self.tmp = np.zeros(nmax)
        self.tmp2 = np.zeros(nmax)
        self.visited = np.zeros(n, dtype=np.int8)
        self.br_choice = np.zeros((n, nmax), dtype=np.int32)


class InfosetTable:
    """Cumulative regrets and weighted strategy sums for every infoset of
    a tree.  Storage is one dense slab per decision node (actions x hands)."""

    def __init__(self, tree: GameTree):
        self.tree = tree
        flat = tree.flat()
        self.regrets = np.zeros(flat.slab_size)
        self.stratsum = np.zeros(flat.slab_size)
        self.iterations = 0

    def node_regrets(self, node: int) -> np.ndarray:
        return self._slab(self.regrets, node)

    def node_stratsum(self, node: int) -> np.ndarray:
        return self._slab(self.stratsum, node)

    def _slab(self, pool: np.ndarray, node: int) -> np.ndarray:
        flat = self.tree.flat()
        a = flat.child_count[node]
        n = self.tree.n_hands(self.tree.player[node])
        off = flat.slab_off[node]
        return pool[off : off + a * n].reshape(a, n)

    def items(self):
        """Yield (infoset key, regret vector, strategy-sum vector)."""
        for node in self.tree.decision_nodes():
            reg = self.node_regrets(node)
            ss = self.node_stratsum(node)
            for h in range(self.tree.n_hands(self.tree.player[node])):
                yield self.tree.infoset_key(node, h), reg[:, h], ss[:, h]


class Policy:
    """Per-infoset action distributions, stored in slab layout."""

    def __init__(self, tree: GameTree, probs: np.ndarray):
        self.tree = tree
        self.probs = probs

    @classmethod
    def uniform(cls, tree: GameTree) -> "Policy":
        flat = tree.flat()
        probs = np.zeros(flat.slab_size)
        p = cls(tree, probs)
        for node in tree.decision_nodes():
            p.at(node)[:] = 1.0 / flat.child_count[node]
        return p

    def at(self, node: int) -> np.ndarray:
        """(actions, hands) distribution block for one public node."""
        flat = self.tree.flat()
        a = flat.child_count[node]
        n = self.tree.n_hands(self.tree.player[node])
        off = flat.slab_off[node]
        return self.probs[off : off + a * n].reshape(a, n)

    def distribution(self, node: int, hand: int) -> np.ndarray:
        return self.at(node)[:, hand].copy()

    def as_dict(self) -> dict:
        out = {}
        for node in self.tree.decision_nodes():
            block = self.at(node)
            labels = self.tree.action_labels[node]
            for h in range(block.shape[1]):
                out[self.tree.infoset_key(node, h)] = {
                    labels[a]: float(block[a, h]) for a in range(block.shape[0])
                }
        return out

    def copy(self) -> "Policy":
        return Policy(self.tree, self.probs.copy())


def average_policy(table: InfosetTable) -> Policy:
    """Normalize weighted strategy sums; uniform on unvisited infosets."""
    tree = table.tree
    probs = np.zeros_like(table.stratsum)
    pol = Policy(tree, probs)
    for node in tree.decision_nodes():
        ss = table.node_stratsum(node)
        tot = ss.sum(axis=0)
        block = pol.at(node)
        nz = tot > 0.0
        block[:, nz] = ss[:, nz] / tot[nz]
        block[:, ~nz] = 1.0 / ss.shape[0]
    return pol


def _seed_state(seed: int) -> np.ndarray:
    mixed = (int(seed) * int(SPLITMIX_GAMMA) + 1) & 0xFFFFFFFFFFFFFFFF
    return np.array([mixed], dtype=np.uint64)


def cfr_iterate(tree: GameTree, table: InfosetTable, t: int,
                variant: str = VANILLA, weighting: str = LINEAR,
                rng: np.ndarray | None = None,
                ws: Workspace | None = None,
                regret_weighting: str | None = None) -> InfosetTable:
    """Run iteration ``t`` (1-based): one update per traverser.

    Linear weighting multiplies iteration-t contributions by t for both
    the strategy sums and (by default) the regrets; ``regret_weighting``
    overrides the latter independently.
    """
    if t < 1:
        raise ValueError("iteration index starts at 1")
    if table.tree is not tree:
        raise ValueError("table was built for a different game")
    flat = tree.flat()
    strat_w = float(t) if weighting == LINEAR else 1.0
    rw = weighting if regret_weighting is None else regret_weighting
    reg_w = float(t) if rw == LINEAR else 1.0

    if variant == VANILLA:
        ws = ws or Workspace(tree)
        sigma = np.zeros(flat.slab_size)
        for traverser in (0, 1):
            vecfr.vanilla_pass(
                flat.kind, flat.player, flat.child_start, flat.child_count,
                flat.child_arr, flat.chance_w, flat.chance_card, flat.slab_off,
                flat.term_type, flat.term_idx, flat.term_scale,
                flat.vec0, flat.vec1, flat.sd_s0, flat.sd_s1,
                flat.sd_ord0, flat.sd_ord1, flat.mats,
                flat.hands0, flat.hands1, flat.mirror0, flat.mirror1,
                flat.w0, flat.w1,
                table.regrets, table.stratsum, sigma,
                ws.r0, ws.r1, ws.rc, ws.vbuf, ws.pc, ws.tmp, ws.tmp2,
                traverser, reg_w, strat_w)
    elif variant == EXTERNAL_SAMPLING:
        if rng is None:
            raise ValueError("external sampling needs an rng state")
        vecfr.es_iteration(
            flat.kind, flat.player, flat.child_start, flat.child_count,
            flat.child_arr, flat.chance_w, flat.chance_card, flat.slab_off,
            flat.term_type, flat.term_idx, flat.term_scale,
            flat.vec0, flat.vec1, flat.sd_s0, flat.sd_s1, flat.mats,
            flat.hands0, flat.hands1, flat.w0, flat.w1,
            table.regrets, table.stratsum, rng, reg_w, strat_w)
    else:
        raise ValueError(f"unknown variant {variant!r}")
    table.iterations = max(table.iterations, t)
    return table


@dataclass
class SolveReport:
    """Iteration/exploitability trace of one solve run."""

    game: str = ""
    variant: str = ""
    weighting: str = ""
    seed: int = 0
    iterations: int = 0
    wall_time: float = 0.0
    samples: list[tuple[int, float, float]] = field(default_factory=list)
    final_exploitability: float | None = None

    def add(self, iteration: int, exploitability: float, elapsed_ms: float):
        self.samples.append((iteration, float(exploitability), float(elapsed_ms)))
        self.final_exploitability = float(exploitability)


class Solver:
    """Driver binding a tree, its table, buffers, and the RNG."""

    def __init__(self, tree: GameTree, variant: str = VANILLA,
                 weighting: str = LINEAR, seed: int = 0,
                 regret_weighting: str | None = None):
        self.tree = tree
        self.variant = variant
        self.weighting = weighting
        self.regret_weighting = regret_weighting
        self.table = InfosetTable(tree)
        self.ws = Workspace(tree)
        self.rng = _seed_state(seed)
        self.t = 0

    def run(self, iterations: int, on_checkpoint=None, checkpoint_every: int = 0):
        for _ in range(iterations):
            self.t += 1
            cfr_iterate(self.tree, self.table, self.t, self.variant,
                        self.weighting, self.rng, self.ws,
                        self.regret_weighting)
            if checkpoint_every and on_checkpoint and self.t % checkpoint_every == 0:
                on_checkpoint(self.t, self)
        return self

    def policy(self) -> Policy:
        return average_policy(self.table)
