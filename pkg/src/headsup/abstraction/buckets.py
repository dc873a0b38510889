"""Hand bucketing: earth-mover k-means over equity features, persisted
as little-endian "DHBK" files.

For 1-D histograms the earth-mover distance equals the L1 distance of the
cumulative sums, so clustering runs in CDF space with L1 assignments and
per-dimension median updates.  A bucket map's assignment function is
"nearest centroid of the exact feature", which the training assignments
also satisfy (the final Lloyd step is an assignment pass), so lookups and
stored assignments can never disagree.

Preflop is identity bucketing: the 169 canonical classes are the buckets.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from numba import njit

from .. import fastcards
from ..cards import PAIR_CARDS, PAIR_PERMS, pair_index
from ..hunl import FLOP, PREFLOP, RIVER, TURN, BOARD_SIZE
from . import features as F
from .canonical import canonicalize, preflop_index_table

MAGIC = b"DHBK"
VERSION = 1

SCHEME_IDENTITY = 0      # preflop: bucket = canonical index
SCHEME_FLOP_HIST = 1
SCHEME_TURN_HIST = 2
SCHEME_RIVER_SCALAR = 3

_SCHEME_FOR_ROUND = {
    PREFLOP: SCHEME_IDENTITY,
    FLOP: SCHEME_FLOP_HIST,
    TURN: SCHEME_TURN_HIST,
    RIVER: SCHEME_RIVER_SCALAR,
}


def fnv1a64(data: bytes) -> int:
    h = 0xCBF29CE484222325
    for b in data:
        h ^= b
        h = (h * 0x100000001B3) & 0xFFFFFFFFFFFFFFFF
    return h


@njit(cache=True)
def _kmeans_assign(X, C, labels):
    n = X.shape[0]
    k = C.shape[0]
    d = X.shape[1]
    for i in range(n):
        best = 0
        bestd = 1.0e300
        for c in range(k):
            dist = 0.0
            for j in range(d):
                diff = X[i, j] - C[c, j]
                dist += diff if diff >= 0 else -diff
            if dist < bestd:
                bestd = dist
                best = c
        labels[i] = best
    return labels


def kmeans_emd(feats: np.ndarray, k: int, seed: int, histograms: bool = True,
               max_iters: int = 60) -> tuple[np.ndarray, np.ndarray]:
    """Cluster histogram rows under earth-mover distance.

    Returns (labels, centroids); centroids live in CDF space when
    ``histograms`` is set.  Deterministic for a fixed seed.
    """
    feats = np.asarray(feats, dtype=np.float64)
    if feats.ndim == 1:
        feats = feats[:, None]
    if k <= 0:
        raise ValueError("bucket count must be positive")
    X = np.cumsum(feats, axis=1) if histograms else feats.copy()
    distinct = np.unique(X, axis=0)
    if k > distinct.shape[0]:
        raise ValueError(f"k={k} exceeds {distinct.shape[0]} distinct feature points")

    rng = np.random.default_rng(seed)
    n = X.shape[0]
    # k-means++ seeding under L1
    centroids = np.empty((k, X.shape[1]))
    first = int(rng.integers(0, n))
    centroids[0] = X[first]
    dists = np.abs(X - centroids[0]).sum(axis=1)
    for c in range(1, k):
        tot = dists.sum()
        if tot <= 0:
            centroids[c] = X[int(rng.integers(0, n))]
            continue
        pick = int(np.searchsorted(np.cumsum(dists), rng.random() * tot))
        pick = min(pick, n - 1)
        centroids[c] = X[pick]
        dists = np.minimum(dists, np.abs(X - centroids[c]).sum(axis=1))

    labels = np.zeros(n, dtype=np.int32)
    prev = None
    for _ in range(max_iters):
        _kmeans_assign(X, centroids, labels)
        if prev is not None and np.array_equal(labels, prev):
            break
        prev = labels.copy()
        for c in range(k):
            members = X[labels == c]
            if members.shape[0] == 0:
                # re-seed on the point farthest from its centroid
                far = int(np.argmax(np.abs(X - centroids[labels]).sum(axis=1)))
                centroids[c] = X[far]
            else:
                centroids[c] = np.median(members, axis=0)
    _kmeans_assign(X, centroids, labels)
    return labels, centroids


@dataclass
class BucketMap:
    """Per-round map from canonical hands to bucket ids."""

    round: int
    n_buckets: int
    seed: int
    scheme: int
    bins: int
    centroids: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))
    assignment: np.ndarray | None = None

    def __post_init__(self):
        self._board_cache: dict = {}
        self._preflop_table: np.ndarray | None = None

    # -- lookup ---------------------------------------------------------

    _CACHE_CAP = 150_000  # covers every canonical river board

    def buckets_for_board(self, board) -> np.ndarray:
        """(1326,) bucket id per hole pair on ``board``; -1 where blocked.

        One exact batch per canonical board, cached; other boards of the
        same suit-isomorphism class reuse it through a pair permutation.
        This is the path the trainer, the agent, and range tracking share.
        """
        if self.scheme == SCHEME_IDENTITY:
            if self._preflop_table is None:
                self._preflop_table = preflop_index_table()
            return self._preflop_table
        b = np.asarray(board, dtype=np.int64)
        key, perm = fastcards.canonical_board_key_perm(b)
        key = int(key)
        rep_arr = self._board_cache.get(key)
        if rep_arr is None:
            rep = np.asarray(fastcards.unpack_board_key(key, len(board)),
                             dtype=np.int64)
            if self.scheme == SCHEME_FLOP_HIST:
                h = F.flop_histograms_all(rep, PAIR_CARDS, self.bins)
                rep_arr = F.assign_histograms(h, self.centroids)
            elif self.scheme == SCHEME_TURN_HIST:
                h = F.turn_histograms_all(rep, PAIR_CARDS, self.bins)
                rep_arr = F.assign_histograms(h, self.centroids)
            else:
                eq = F.river_equity_all(rep, PAIR_CARDS)
                rep_arr = F.assign_scalars(eq, self.centroids)
            if self.n_buckets <= 127:
                rep_arr = rep_arr.astype(np.int8)
            elif self.n_buckets <= 32_000:
                rep_arr = rep_arr.astype(np.int16)
            if len(self._board_cache) >= self._CACHE_CAP:
                self._board_cache.clear()
            self._board_cache[key] = rep_arr
        return rep_arr[PAIR_PERMS[perm]]

    def fingerprint(self) -> int:
        return fnv1a64(self._body_bytes())

    # -- persistence ------------------------------------------------------

    def _body_bytes(self) -> bytes:
        assign = self.assignment if self.assignment is not None else np.zeros(0, dtype=np.uint32)
        cent = np.ascontiguousarray(self.centroids, dtype="<f8")
        parts = [
            struct.pack("<BIQ", self.round, self.n_buckets, self.seed),
            struct.pack("<Q", assign.size),
            np.ascontiguousarray(assign, dtype="<u4").tobytes(),
            struct.pack("<II", cent.shape[0], cent.shape[1] if cent.ndim > 1 else 0),
            cent.tobytes(),
            struct.pack("<BI", self.scheme, self.bins),
        ]
        return b"".join(parts)

    def save(self, path) -> int:
        body = self._body_bytes()
        fp = fnv1a64(body)
        with open(path, "wb") as f:
            f.write(MAGIC)
            f.write(struct.pack("<I", VERSION))
            f.write(body)
            f.write(struct.pack("<Q", fp))
        return fp

    @classmethod
    def load(cls, path) -> "BucketMap":
        with open(path, "rb") as f:
            blob = f.read()
        if blob[:4] != MAGIC:
            raise ValueError("bad magic: not a bucket-map file")
        (version,) = struct.unpack_from("<I", blob, 4)
        if version != VERSION:
            raise ValueError(f"unsupported bucket-map version {version}")
        body = blob[8:-8]
        (stored_fp,) = struct.unpack_from("<Q", blob, len(blob) - 8)
        if fnv1a64(body) != stored_fp:
            raise ValueError("bucket-map checksum mismatch")
        off = 0
        rnd, nb, seed = struct.unpack_from("<BIQ", body, off)
        off += 13
        (n_assign,) = struct.unpack_from("<Q", body, off)
        off += 8
        assign = np.frombuffer(body, dtype="<u4", count=n_assign, offset=off).copy()
        off += 4 * n_assign
        ck, cd = struct.unpack_from("<II", body, off)
        off += 8
        cent = np.frombuffer(body, dtype="<f8", count=ck * cd, offset=off).reshape(ck, cd).copy()
        off += 8 * ck * cd
        scheme, bins = struct.unpack_from("<BI", body, off)
        return cls(round=rnd, n_buckets=nb, seed=seed, scheme=scheme,
                   bins=bins, centroids=cent,
                   assignment=assign if n_assign else None)

    @classmethod
    def preflop_identity(cls) -> "BucketMap":
        return cls(round=PREFLOP, n_buckets=169, seed=0,
                   scheme=SCHEME_IDENTITY, bins=0,
                   assignment=np.arange(169, dtype=np.uint32))


def bucket_of(bmap: BucketMap, holes, board=()) -> int:
    """Bucket id of (holes, board); errors on round mismatch or a hand
    that collides with the board (never a silent default)."""
    if BOARD_SIZE[bmap.round] != len(board):
        raise ValueError(
            f"bucket map is for round {bmap.round}, board has {len(board)} cards")
    canonicalize(holes, board)  # validates cards, raises on duplicates
    arr = bmap.buckets_for_board(list(board))
    b = int(arr[pair_index(holes[0], holes[1])])
    if b < 0 or b >= bmap.n_buckets:
        raise ValueError("hand has no bucket assignment")
    return b


def build_buckets(feats: np.ndarray, k: int, seed: int, round: int,
                  bins: int | None = None) -> BucketMap:
    """Cluster per-canonical feature rows into k buckets.

    ``feats``: (n, bins) histograms (or (n,) scalars for the river).
    The returned map assigns any hand by nearest centroid; the training
    rows' labels are stored as the materialized assignment.
    """
    scheme = _SCHEME_FOR_ROUND[round]
    if scheme == SCHEME_IDENTITY:
        raise ValueError("preflop bucketing is identity; nothing to build")
    hist = scheme != SCHEME_RIVER_SCALAR
    labels, cents = kmeans_emd(feats, k, seed, histograms=hist)
    return BucketMap(round=round, n_buckets=k, seed=seed, scheme=scheme,
                     bins=bins if bins is not None else (feats.shape[1] if feats.ndim > 1 else 1),
                     centroids=cents,
                     assignment=labels.astype(np.uint32))


def sample_board_features(round: int, n_boards: int, seed: int,
                          bins: int = 50, pairs_per_board: int = 80):
    """Training features from randomly sampled boards: exact per-pair
    features, subsampled rows.  Returns an (n, d) matrix."""
    rng = np.random.default_rng(seed)
    nb = BOARD_SIZE[round]
    rows = []
    for _ in range(n_boards):
        board = rng.choice(52, size=nb, replace=False).astype(np.int64)
        if round == FLOP:
            feats = F.flop_histograms_all(board, PAIR_CARDS, bins)
        elif round == TURN:
            feats = F.turn_histograms_all(board, PAIR_CARDS, bins)
        elif round == RIVER:
            feats = F.river_equity_all(board, PAIR_CARDS)[:, None]
        else:
            raise ValueError("preflop has no features")
        valid = np.where(feats[:, 0] >= 0)[0]
        take = rng.choice(valid, size=min(pairs_per_board, valid.size), replace=False)
        rows.append(feats[take])
    return np.vstack(rows)
