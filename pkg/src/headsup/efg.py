"""Extensive-form games as public trees over private-hand vectors.

A ``GameTree`` holds the public action/chance structure; each player's
private information is a fixed list of hands (cards for Kuhn/Leduc,
hole-card pairs for hold'em subgames).  An infoset is a (public decision
node, private hand) pair.  Terminals store decomposable payoff specs so
solvers can evaluate whole hand vectors without materializing payoff
matrices:

  * vec:       u0(i, j) = v0[i] + v1[j]          (folds, gadget anchors)
  * showdown:  u0(i, j) = scale * sign(s0[i] - s1[j])
  * matrix:    u0(i, j) = M[i, j]                (small games only)

Hands sharing a card are incompatible and carry zero joint weight; all
evaluators honor that through card-membership sums rather than masks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DECISION, CHANCE, TERMINAL = 0, 1, 2
TERM_VEC, TERM_SHOWDOWN, TERM_MATRIX = 0, 1, 2


@dataclass
class FlatTree:
    """Numpy image of a GameTree, consumed by the solver kernels."""

    kind: np.ndarray          # int8 per node
    player: np.ndarray        # int8, decision nodes
    round: np.ndarray         # int8 per node
    child_start: np.ndarray   # int32 into child_arr
    child_count: np.ndarray
    child_arr: np.ndarray     # int32 node ids
    chance_w: np.ndarray      # float64 per child slot
    chance_card: np.ndarray   # int16 per child slot, -1 if no deal
    slab_off: np.ndarray      # int64 regret-pool offset per node (-1 if n/a)
    term_type: np.ndarray     # int8 per node, -1 if not terminal
    term_idx: np.ndarray      # int32 into the per-type pools
    term_scale: np.ndarray    # float64 (showdown stake)
    vec0: np.ndarray          # (n_vec, N0)
    vec1: np.ndarray          # (n_vec, N1)
    sd_s0: np.ndarray         # (n_sd, N0) strengths
    sd_s1: np.ndarray
    sd_ord0: np.ndarray       # (n_sd, N0) int32 ascending-strength order
    sd_ord1: np.ndarray
    mats: np.ndarray          # (n_mat, N0, N1)
    hands0: np.ndarray        # (N0, 2) int16 card ids, -1 pad
    hands1: np.ndarray
    mirror0: np.ndarray       # (N0,) index of identical hand in other space
    mirror1: np.ndarray
    w0: np.ndarray            # initial hand weights
    w1: np.ndarray
    n_cards: int
    slab_size: int


class GameTree:
    """Builder + metadata for a two-player zero-sum public game tree."""

    def __init__(self, hand_cards0, hand_cards1, hand_labels0, hand_labels1,
                 w0, w1, n_cards: int):
        self.hands0 = np.asarray(hand_cards0, dtype=np.int16).reshape(len(hand_cards0), -1)
        self.hands1 = np.asarray(hand_cards1, dtype=np.int16).reshape(len(hand_cards1), -1)
        if self.hands0.shape[1] == 1:
            self.hands0 = np.hstack([self.hands0, np.full_like(self.hands0, -1)])
        if self.hands1.shape[1] == 1:
            self.hands1 = np.hstack([self.hands1, np.full_like(self.hands1, -1)])
        self.hand_labels = (list(hand_labels0), list(hand_labels1))
        self.w0 = np.asarray(w0, dtype=np.float64)
        self.w1 = np.asarray(w1, dtype=np.float64)
        self.n_cards = n_cards
        self.kind: list[int] = []
        self.player: list[int] = []
        self.round: list[int] = []
        self.label: list[str] = []
        self.children: list[list[int]] = []
        self.cweight: list[list[float]] = []
        self.cdeal: list[list[int]] = []
        self.action_labels: list[list[str] | None] = []
        self.term_spec: list[tuple | None] = []
        self._flat: FlatTree | None = None

    # -- construction ---------------------------------------------------

    def _new_node(self, kind, label, round_, player=-1) -> int:
        self.kind.append(kind)
        self.player.append(player)
        self.round.append(round_)
        self.label.append(label)
        self.children.append([])
        self.cweight.append([])
        self.cdeal.append([])
        self.action_labels.append(None)
        self.term_spec.append(None)
        self._flat = None
        return len(self.kind) - 1

    def decision(self, player: int, label: str, round_: int,
                 action_labels: list[str]) -> int:
        nid = self._new_node(DECISION, label, round_, player)
        self.action_labels[nid] = list(action_labels)
        return nid

    def chance(self, label: str, round_: int) -> int:
        return self._new_node(CHANCE, label, round_)

    def add_child(self, parent: int, child: int, weight: float = 1.0,
                  deal_card: int = -1) -> None:
        self.children[parent].append(child)
        self.cweight[parent].append(weight)
        self.cdeal[parent].append(deal_card)
        self._flat = None

    def terminal_vec(self, label: str, round_: int, v0, v1) -> int:
        nid = self._new_node(TERMINAL, label, round_)
        self.term_spec[nid] = (TERM_VEC, np.asarray(v0, dtype=np.float64),
                               np.asarray(v1, dtype=np.float64))
        return nid

    def terminal_fold(self, label: str, round_: int, winner: int, stake: float) -> int:
        """Fold for ``stake`` chips: the folder loses the matched amount."""
        sign = 1.0 if winner == 0 else -1.0
        v0 = np.full(self.n_hands(0), sign * stake)
        v1 = np.zeros(self.n_hands(1))
        return self.terminal_vec(label, round_, v0, v1)

    def terminal_showdown(self, label: str, round_: int, stake: float,
                          s0, s1) -> int:
        nid = self._new_node(TERMINAL, label, round_)
        self.term_spec[nid] = (TERM_SHOWDOWN, float(stake),
                               np.asarray(s0, dtype=np.float64),
                               np.asarray(s1, dtype=np.float64))
        return nid

    def terminal_matrix(self, label: str, round_: int, matrix) -> int:
        nid = self._new_node(TERMINAL, label, round_)
        self.term_spec[nid] = (TERM_MATRIX, np.asarray(matrix, dtype=np.float64))
        return nid

    # -- queries ----------------------------------------------------------

    @property
    def n_nodes(self) -> int:
        return len(self.kind)

    def n_hands(self, player: int) -> int:
        return self.hands0.shape[0] if player == 0 else self.hands1.shape[0]

    def n_actions(self, node: int) -> int:
        return len(self.children[node])

    def decision_nodes(self, player: int | None = None):
        for n in range(self.n_nodes):
            if self.kind[n] == DECISION and (player is None or self.player[n] == player):
                yield n

    def infoset_key(self, node: int, hand: int) -> tuple:
        p = self.player[node]
        return (p, self.round[node], self.hand_labels[p][hand], self.label[node])

    # -- flattening --------------------------------------------------------

    def flat(self) -> FlatTree:
        if self._flat is not None:
            return self._flat
        n = self.n_nodes
        kind = np.asarray(self.kind, dtype=np.int8)
        player = np.asarray(self.player, dtype=np.int8)
        rounds = np.asarray(self.round, dtype=np.int8)
        counts = np.asarray([len(c) for c in self.children], dtype=np.int32)
        starts = np.zeros(n, dtype=np.int32)
        starts[1:] = np.cumsum(counts)[:-1]
        child_arr = np.asarray([c for cs in self.children for c in cs], dtype=np.int32)
        chance_w = np.asarray([w for ws in self.cweight for w in ws], dtype=np.float64)
        chance_card = np.asarray([d for ds in self.cdeal for d in ds], dtype=np.int16)

        slab_off = np.full(n, -1, dtype=np.int64)
        off = 0
        for nid in range(n):
            if kind[nid] == DECISION:
                slab_off[nid] = off
                off += counts[nid] * self.n_hands(player[nid])
        slab_size = off

        term_type = np.full(n, -1, dtype=np.int8)
        term_idx = np.zeros(n, dtype=np.int32)
        term_scale = np.zeros(n, dtype=np.float64)
        vec0, vec1, sd0, sd1, mats = [], [], [], [], []
        for nid in range(n):
            spec = self.term_spec[nid]
            if spec is None:
                continue
            t = spec[0]
            term_type[nid] = t
            if t == TERM_VEC:
                term_idx[nid] = len(vec0)
                vec0.append(spec[1])
                vec1.append(spec[2])
            elif t == TERM_SHOWDOWN:
                term_idx[nid] = len(sd0)
                term_scale[nid] = spec[1]
                sd0.append(spec[2])
                sd1.append(spec[3])
            else:
                term_idx[nid] = len(mats)
                mats.append(spec[1])

        N0, N1 = self.n_hands(0), self.n_hands(1)
        empty0 = np.zeros((0, N0))
        empty1 = np.zeros((0, N1))
        sd_s0 = np.vstack(sd0) if sd0 else empty0
        sd_s1 = np.vstack(sd1) if sd1 else empty1
        self._flat = FlatTree(
            kind=kind, player=player, round=rounds,
            child_start=starts, child_count=counts, child_arr=child_arr,
            chance_w=chance_w, chance_card=chance_card,
            slab_off=slab_off,
            term_type=term_type, term_idx=term_idx, term_scale=term_scale,
            vec0=np.vstack(vec0) if vec0 else empty0,
            vec1=np.vstack(vec1) if vec1 else empty1,
            sd_s0=sd_s0, sd_s1=sd_s1,
            sd_ord0=np.argsort(sd_s0, axis=1, kind="stable").astype(np.int32),
            sd_ord1=np.argsort(sd_s1, axis=1, kind="stable").astype(np.int32),
            mats=np.stack(mats) if mats else np.zeros((0, N0, N1)),
            hands0=self.hands0, hands1=self.hands1,
            mirror0=_mirrors(self.hands0, self.hands1),
            mirror1=_mirrors(self.hands1, self.hands0),
            w0=self.w0, w1=self.w1,
            n_cards=self.n_cards, slab_size=slab_size,
        )
        return self._flat


def _mirrors(mine: np.ndarray, other: np.ndarray) -> np.ndarray:
    """Index of the identical card set in the other player's hand space."""
    lookup = {}
    for j in range(other.shape[0]):
        lookup[tuple(sorted(other[j].tolist()))] = j
    out = np.full(mine.shape[0], -1, dtype=np.int32)
    for i in range(mine.shape[0]):
        out[i] = lookup.get(tuple(sorted(mine[i].tolist())), -1)
    return out
