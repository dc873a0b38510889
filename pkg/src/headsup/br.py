"""Exact best response, expected value, and exploitability on game trees.

Everything here is a single forward/backward sweep; cost is O(nodes x
hands), guarded by a node-count limit for safety.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import vecfr
from .cfr import Policy, Workspace
from .efg import DECISION, GameTree

MAX_EXACT_CELLS = 500_000_000


@dataclass
class BestResponse:
    value: float
    policy: Policy
    root_values: np.ndarray  # responder per-hand counterfactual values


def _guard(tree: GameTree) -> None:
    flat = tree.flat()
    cells = flat.kind.shape[0] * max(flat.hands0.shape[0], flat.hands1.shape[0])
    if cells > MAX_EXACT_CELLS:
        raise ValueError(f"game too large for exact walk ({cells} cells)")


def _run_eval(tree: GameTree, policy: Policy, responder: int, mode: int,
              root: int = 0, r0=None, r1=None, rc: float = 1.0,
              ws: Workspace | None = None):
    _guard(tree)
    flat = tree.flat()
    ws = ws or Workspace(tree)
    r0 = flat.w0 if r0 is None else np.asarray(r0, dtype=np.float64)
    r1 = flat.w1 if r1 is None else np.asarray(r1, dtype=np.float64)
    vals = vecfr.eval_pass(
        flat.kind, flat.player, flat.child_start, flat.child_count,
        flat.child_arr, flat.chance_w, flat.chance_card, flat.slab_off,
        flat.term_type, flat.term_idx, flat.term_scale,
        flat.vec0, flat.vec1, flat.sd_s0, flat.sd_s1,
        flat.sd_ord0, flat.sd_ord1, flat.mats,
        flat.hands0, flat.hands1, flat.mirror0, flat.mirror1,
        policy.probs, root, r0, r1, rc,
        responder, mode,
        ws.r0, ws.r1, ws.rc, ws.vbuf, ws.visited, ws.pc, ws.tmp, ws.tmp2,
        ws.br_choice)
    n = tree.n_hands(responder)
    return np.array(vals[:n]), ws


def best_response(tree: GameTree, policy: Policy, responder: int,
                  ws: Workspace | None = None) -> BestResponse:
    """Maximal-value response to ``policy``; exact tree walk.

    Ties break to the lowest action index.  The returned value is the
    responder's expected chips per hand at the root.
    """
    vals, ws = _run_eval(tree, policy, responder, vecfr.BR_MODE_MAX, ws=ws)
    flat = tree.flat()
    w_resp = flat.w0 if responder == 0 else flat.w1
    value = float(np.dot(w_resp, vals))
    probs = policy.probs.copy()
    br = Policy(tree, probs)
    for node in tree.decision_nodes(responder):
        block = br.at(node)
        block[:] = 0.0
        picks = ws.br_choice[node, : block.shape[1]]
        for h in range(block.shape[1]):
            block[picks[h], h] = 1.0
    return BestResponse(value=value, policy=br, root_values=vals)


def expected_value(tree: GameTree, policy: Policy, player: int = 0,
                   ws: Workspace | None = None) -> float:
    """Expected chips for ``player`` when both sides follow ``policy``."""
    vals, _ = _run_eval(tree, policy, player, vecfr.BR_MODE_VALUE, ws=ws)
    flat = tree.flat()
    w = flat.w0 if player == 0 else flat.w1
    return float(np.dot(w, vals))


def exploitability(tree: GameTree, policy: Policy,
                   ws: Workspace | None = None) -> float:
    """Average best-response value against each side; 0 at equilibrium."""
    b0 = best_response(tree, policy, 0, ws)
    b1 = best_response(tree, policy, 1, ws)
    return (b0.value + b1.value) / 2.0


def subtree_cfvs(tree: GameTree, policy: Policy, node: int, responder: int,
                 r0, r1, rc: float = 1.0, best: bool = True,
                 ws: Workspace | None = None) -> np.ndarray:
    """Responder per-hand counterfactual values of the subtree at ``node``
    under entry reaches (r0, r1): best-responding if ``best`` else
    following ``policy``.  Values are weighted by the opponent entry reach
    (not the responder's own)."""
    mode = vecfr.BR_MODE_MAX if best else vecfr.BR_MODE_VALUE
    vals, _ = _run_eval(tree, policy, responder, mode, root=node,
                        r0=r0, r1=r1, rc=rc, ws=ws)
    return vals


def reach_probabilities(tree: GameTree, policy: Policy):
    """Per-node reach vectors (r0, r1, rc) under ``policy`` including the
    initial hand weights and chance, with blocker masking."""
    flat = tree.flat()
    n = flat.kind.shape[0]
    r0 = np.zeros((n, flat.hands0.shape[0]))
    r1 = np.zeros((n, flat.hands1.shape[0]))
    rc = np.zeros(n)
    r0[0] = flat.w0
    r1[0] = flat.w1
    rc[0] = 1.0
    for node in range(n):
        k = flat.kind[node]
        if k == vecfr.TERMINAL:
            continue
        cs = flat.child_start[node]
        for a in range(flat.child_count[node]):
            c = flat.child_arr[cs + a]
            if k == DECISION:
                p = flat.player[node]
                block = policy.at(node)
                rc[c] = rc[node]
                if p == 0:
                    r0[c] = r0[node] * block[a]
                    r1[c] = r1[node]
                else:
                    r0[c] = r0[node]
                    r1[c] = r1[node] * block[a]
            else:
                card = flat.chance_card[cs + a]
                rc[c] = rc[node] * flat.chance_w[cs + a]
                m0 = ~np.any(flat.hands0 == card, axis=1) if card >= 0 else True
                m1 = ~np.any(flat.hands1 == card, axis=1) if card >= 0 else True
                r0[c] = r0[node] * m0
                r1[c] = r1[node] * m1
    return r0, r1, rc
