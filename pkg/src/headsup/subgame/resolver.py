"""Safe depth-limited subgame re-solving.

The re-solved game is a gadget: at the root the opponent chooses, per
private hand, between TERMINATE (collecting that hand's alternative
value, i.e. what the blueprint already concedes it) and ENTER (playing
the subgame).  Solving the gadget can therefore never hand the opponent
more than the blueprint did, up to solve tolerance; the per-hand margin
``alt - achieved`` certifies it.

Depth limits truncate the subgame at a betting-round boundary; leaves
become an opponent choice among continuation models (blueprint and
action-biased variants), each valued by an exact policy rollout.  Range
diversity enters as a mixture of transformed baseline ranges in the
gadget's deal.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import vecfr
from ..br import subtree_cfvs
from ..cfr import Policy, Solver
from ..efg import (CHANCE, DECISION, TERM_MATRIX, TERM_SHOWDOWN, TERM_VEC,
                   TERMINAL, GameTree)
from .ranges import apply_transform

NEG_INF = -1.0e18

FOLD_CLASS = ("fold",)
CALL_CLASS = ("call", "check")
RAISE_CLASS = ("raise", "bet")
_CLASS_BY_NAME = {
    "fold-biased": FOLD_CLASS,
    "call-biased": CALL_CLASS,
    "raise-biased": RAISE_CLASS,
}
BIAS_WEIGHT = 0.25


@dataclass(frozen=True)
class OpponentModel:
    """One modeled opponent: a transform of the baseline range plus a
    continuation policy for depth-limit leaves."""

    label: str = "identity"
    range_transform: str = "identity"
    continuation: str = "blueprint"


DEFAULT_MODELS = (
    OpponentModel("blueprint"),
    OpponentModel("fold-biased", continuation="fold-biased"),
    OpponentModel("call-biased", continuation="call-biased"),
    OpponentModel("raise-biased", continuation="raise-biased"),
)


@dataclass
class SubgameSpec:
    """Everything a re-solve needs, anchored at one public node."""

    node: int                      # subgame root in the source tree
    resolver: int                  # player whose strategy is re-solved
    own_reach: np.ndarray          # resolver reach at node (incl. deal weights)
    opp_range: np.ndarray          # baseline opponent range at node
    alt_values: np.ndarray         # per opponent hand, chips (NEG_INF = disabled)
    budget: int
    models: tuple[OpponentModel, ...] = DEFAULT_MODELS
    depth_limit: int | None = None  # last round kept; None = to game end
    seed: int = 0

    def __post_init__(self):
        if self.budget <= 0:
            raise ValueError("iteration budget must be positive")
        if not self.models:
            raise ValueError("model set must be non-empty")
        support = np.asarray(self.opp_range) > 0
        if not np.all(np.isfinite(np.asarray(self.alt_values)[support])
                      | (np.asarray(self.alt_values)[support] <= NEG_INF)):
            raise ValueError("alternative values must cover the range support")


@dataclass
class ResolveResult:
    gadget: GameTree
    node_map: dict                 # source node id -> gadget node id
    enter_node: int
    policy: Policy                 # average policy on the gadget
    margins: np.ndarray            # alt - achieved, per opponent hand (nan off-support)
    achieved: np.ndarray           # opponent best-response CFV per hand
    own_value: float               # resolver's gadget value under the average policy
    spec: SubgameSpec = None


def _compat_matrix(tree: GameTree) -> np.ndarray:
    h0 = tree.hands0
    h1 = tree.hands1
    n0, n1 = h0.shape[0], h1.shape[0]
    out = np.ones((n0, n1), dtype=bool)
    for s in range(2):
        for t in range(2):
            a = h0[:, s][:, None]
            b = h1[:, t][None, :]
            out &= ~((a >= 0) & (a == b))
    return out


def _terminal_u0_matrix(tree: GameTree, node: int) -> np.ndarray:
    spec = tree.term_spec[node]
    kind = spec[0]
    if kind == TERM_VEC:
        return spec[1][:, None] + spec[2][None, :]
    if kind == TERM_SHOWDOWN:
        stake, s0, s1 = spec[1], spec[2], spec[3]
        return stake * np.sign(s0[:, None] - s1[None, :])
    return spec[1].copy()


def bias_policy(tree: GameTree, policy: Policy, bias: str) -> Policy:
    """Blueprint shifted toward an action class: 75% blueprint, 25%
    uniform over the class's actions at each node that offers any."""
    if bias == "blueprint":
        return policy
    cls = _CLASS_BY_NAME[bias]
    out = policy.copy()
    for node in tree.decision_nodes():
        labels = tree.action_labels[node]
        members = [a for a, lab in enumerate(labels)
                   if lab.split(":")[0] in cls]
        if not members:
            continue
        block = out.at(node)
        target = np.zeros_like(block)
        target[members] = 1.0 / len(members)
        block[:] = (1.0 - BIAS_WEIGHT) * block + BIAS_WEIGHT * target
    return out


def policy_value_matrix(tree: GameTree, node: int, pol0: Policy,
                        pol1: Policy) -> np.ndarray:
    """Exact expected-utility matrix u0(i, j) of the subtree at ``node``
    when player 0 follows pol0 and player 1 follows pol1.  Incompatible
    hand pairs are zeroed."""
    flat = tree.flat()
    block = _compat_matrix(tree)

    def rec(n: int) -> np.ndarray:
        k = tree.kind[n]
        if k == TERMINAL:
            return _terminal_u0_matrix(tree, n) * block
        cs = flat.child_start[n]
        if k == CHANCE:
            acc = np.zeros(block.shape)
            for a in range(flat.child_count[n]):
                c = flat.child_arr[cs + a]
                card = flat.chance_card[cs + a]
                v = rec(c) * flat.chance_w[cs + a]
                if card >= 0:
                    m0 = ~np.any(tree.hands0 == card, axis=1)
                    m1 = ~np.any(tree.hands1 == card, axis=1)
                    v = v * m0[:, None] * m1[None, :]
                acc += v
            return acc
        p = tree.player[n]
        sigma = (pol0 if p == 0 else pol1).at(n)
        acc = np.zeros(block.shape)
        for a in range(flat.child_count[n]):
            c = flat.child_arr[cs + a]
            v = rec(c)
            acc += v * (sigma[a][:, None] if p == 0 else sigma[a][None, :])
        return acc

    return rec(node)


def blueprint_alt_values(tree: GameTree, blueprint: Policy, node: int,
                         resolver: int, own_reach: np.ndarray,
                         rc: float = 1.0) -> np.ndarray:
    """Per-hand counterfactual best-response values the opponent can
    secure against the blueprint inside the subgame at ``node`` —
    the safety anchors.  Values are chips conditioned on holding the
    hand (invariant to any scaling of the opponent's own range)."""
    opp = 1 - resolver
    if resolver == 0:
        r0, r1 = own_reach, np.ones(tree.n_hands(1))
    else:
        r0, r1 = np.ones(tree.n_hands(0)), own_reach
    vals = subtree_cfvs(tree, blueprint, node, opp, r0, r1, rc, best=True)
    denom = _own_mass_per_opp_hand(tree, own_reach, resolver) * rc
    out = np.full(tree.n_hands(opp), np.nan)
    ok = denom > 0
    out[ok] = vals[ok] / denom[ok]
    return out


def _own_mass_per_opp_hand(tree: GameTree, own_reach: np.ndarray,
                           resolver: int) -> np.ndarray:
    """For each opponent hand, the resolver's compatible reach mass."""
    flat = tree.flat()
    if resolver == 0:
        mine, theirs = flat.hands0, flat.hands1
        mirror = flat.mirror1
    else:
        mine, theirs = flat.hands1, flat.hands0
        mirror = flat.mirror0
    pc = np.zeros(flat.n_cards)
    out = np.empty(theirs.shape[0])
    vecfr._compat_sum(np.ascontiguousarray(own_reach), mine, theirs,
                      mirror, pc, out)
    return out


def make_subgame_spec(tree: GameTree, blueprint: Policy, node: int,
                      budget: int, models=DEFAULT_MODELS,
                      depth_limit: int | None = None, seed: int = 0,
                      resolver: int | None = None,
                      reaches=None) -> SubgameSpec:
    """Assemble a spec from blueprint reach probabilities at ``node``."""
    from ..br import reach_probabilities

    if tree.kind[node] != DECISION:
        raise ValueError("subgame root must be a decision node")
    if resolver is None:
        resolver = tree.player[node]
    r0, r1, rc = reaches if reaches is not None else reach_probabilities(tree, blueprint)
    own = r0[node] if resolver == 0 else r1[node]
    opp = (r1[node] if resolver == 0 else r0[node]).copy()
    if opp.sum() <= 0:
        raise ValueError("subgame root unreachable under the blueprint")
    opp = opp / opp.sum()
    alt = blueprint_alt_values(tree, blueprint, node, resolver,
                               own, rc=float(rc[node]))
    alt = np.where(np.isnan(alt), 0.0, alt)
    return SubgameSpec(node=node, resolver=resolver,
                       own_reach=own * rc[node], opp_range=opp,
                       alt_values=alt, budget=budget, models=tuple(models),
                       depth_limit=depth_limit, seed=seed)


def build_gadget(spec: SubgameSpec, tree: GameTree,
                 blueprint: Policy) -> tuple[GameTree, dict, int]:
    """Materialize the gadget game for a spec.

    Returns (gadget tree, source->gadget node map, enter node id).
    """
    p = spec.resolver
    q = 1 - p
    nq = tree.n_hands(q)
    mix = np.zeros(nq)
    for m in spec.models:
        mix += apply_transform(spec.opp_range, m.range_transform)
    mix /= len(spec.models)

    if p == 0:
        w0, w1 = spec.own_reach, mix
    else:
        w0, w1 = mix, spec.own_reach
    g = GameTree(tree.hands0, tree.hands1,
                 tree.hand_labels[0], tree.hand_labels[1],
                 w0=w0, w1=w1, n_cards=tree.n_cards)

    rnd = tree.round[spec.node]
    root = g.decision(q, "gadget", rnd, ["terminate", "enter"])
    alt = np.where(np.asarray(spec.alt_values) <= NEG_INF, NEG_INF,
                   np.nan_to_num(spec.alt_values))
    if q == 1:
        term = g.terminal_vec("terminate", rnd, np.zeros(tree.n_hands(0)), -alt)
    else:
        term = g.terminal_vec("terminate", rnd, alt, np.zeros(tree.n_hands(1)))
    g.add_child(root, term)

    node_map: dict[int, int] = {}
    flat = tree.flat()
    cont_policies = {
        m.continuation: bias_policy(tree, blueprint, m.continuation)
        for m in spec.models
    }

    def copy(n: int) -> int:
        k = tree.kind[n]
        label = tree.label[n]
        rnd_n = tree.round[n]
        if (spec.depth_limit is not None and rnd_n > spec.depth_limit
                and k != TERMINAL):
            # depth-limit leaf: opponent picks a continuation model
            leaf = g.decision(q, label + "#models", rnd_n,
                              ["model:" + m.label for m in spec.models])
            for m in spec.models:
                cont = cont_policies[m.continuation]
                V = policy_value_matrix(tree, n,
                                        cont if q == 0 else blueprint,
                                        cont if q == 1 else blueprint)
                g.add_child(leaf, g.terminal_matrix(
                    label + "#" + m.label, rnd_n, V))
            return leaf
        if k == TERMINAL:
            s = tree.term_spec[n]
            if s[0] == TERM_VEC:
                nid = g.terminal_vec(label, rnd_n, s[1], s[2])
            elif s[0] == TERM_SHOWDOWN:
                nid = g.terminal_showdown(label, rnd_n, s[1], s[2], s[3])
            else:
                nid = g.terminal_matrix(label, rnd_n, s[1])
            node_map[n] = nid
            return nid
        if k == CHANCE:
            nid = g.chance(label, rnd_n)
            node_map[n] = nid
            cs = flat.child_start[n]
            for a in range(flat.child_count[n]):
                g.add_child(nid, copy(flat.child_arr[cs + a]),
                            weight=float(flat.chance_w[cs + a]),
                            deal_card=int(flat.chance_card[cs + a]))
            return nid
        nid = g.decision(tree.player[n], label, rnd_n,
                         list(tree.action_labels[n]))
        node_map[n] = nid
        cs = flat.child_start[n]
        for a in range(flat.child_count[n]):
            g.add_child(nid, copy(flat.child_arr[cs + a]))
        return nid

    enter = copy(spec.node)
    g.add_child(root, enter)
    return g, node_map, enter


def solve_gadget(gadget: GameTree, enter: int, spec: SubgameSpec,
                 node_map: dict, variant: str = "vanilla") -> ResolveResult:
    """Run linear CFR on a built gadget for the budget; audit margins by an
    exact opponent best response inside the re-solved subgame."""
    solver = Solver(gadget, variant=variant, weighting="linear",
                    seed=spec.seed)
    solver.run(spec.budget)
    avg = solver.policy()

    p = spec.resolver
    q = 1 - p
    flatg = gadget.flat()
    if p == 0:
        r0, r1 = flatg.w0, np.ones(gadget.n_hands(1))
    else:
        r0, r1 = np.ones(gadget.n_hands(0)), flatg.w1
    vals = subtree_cfvs(gadget, avg, enter, q, r0, r1, 1.0, best=True)
    denom = _own_mass_per_opp_hand(gadget, spec.own_reach, p)
    achieved = np.full(gadget.n_hands(q), np.nan)
    ok = denom > 0
    achieved[ok] = vals[ok] / denom[ok]

    support = np.asarray(spec.opp_range) > 0
    margins = np.full(gadget.n_hands(q), np.nan)
    alt = np.asarray(spec.alt_values)
    m_ok = support & ok & (alt > NEG_INF)
    margins[m_ok] = alt[m_ok] - achieved[m_ok]

    from ..br import expected_value

    own_value = expected_value(gadget, avg, player=p)
    return ResolveResult(gadget=gadget, node_map=node_map, enter_node=enter,
                         policy=avg, margins=margins, achieved=achieved,
                         own_value=own_value, spec=spec)


def solve_depth_limited(spec: SubgameSpec, tree: GameTree,
                        blueprint: Policy) -> ResolveResult:
    """Run linear CFR on the gadget for the budget; return the resolver's
    trunk policy plus per-hand safety margins."""
    gadget, node_map, enter = build_gadget(spec, tree, blueprint)
    return solve_gadget(gadget, enter, spec, node_map)


def apply_resolve(tree: GameTree, blueprint: Policy,
                  result: ResolveResult) -> Policy:
    """Blueprint with the re-solved subgame patched in for the resolver."""
    combined = blueprint.copy()
    p = result.spec.resolver
    for src, dst in result.node_map.items():
        if tree.kind[src] == DECISION and tree.player[src] == p:
            combined.at(src)[:] = result.policy.at(dst)
    return combined


def subgame_roots(tree: GameTree, round_: int, policy: Policy | None = None,
                  min_reach: float = 1e-9) -> list[int]:
    """Decision nodes opening the given round (both players), optionally
    filtered to those reachable under a policy."""
    from ..br import reach_probabilities

    reach = None
    if policy is not None:
        r0, r1, rc = reach_probabilities(tree, policy)
        reach = (r0.sum(axis=1) * r1.sum(axis=1) * rc)
    out = []
    for n in tree.decision_nodes():
        if tree.round[n] != round_:
            continue
        # a round-opening node: its label ends with the round separator
        if tree.label[n].endswith(":") or (round_ == 0 and tree.label[n] == ""):
            if reach is None or reach[n] > min_reach:
                out.append(n)
    return out
