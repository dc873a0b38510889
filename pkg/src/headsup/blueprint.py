"""Blueprint training pipeline and the persisted strategy store.

``train`` runs external-sampling MCCFR with linear weighting over the
abstracted HUNL game and produces a StrategyStore: the average strategy
per (round, bucket, abstract action sequence), persisted in the "DHBP"
format with abstraction fingerprints and a trailing checksum.

The desk profile (169/200/100/50 buckets) runs the whole pipeline in
minutes; the paper profile (169/50,000/5,000/1,000 and 2e8 iterations)
is accepted as configuration but is a cluster-scale job, not a test
target.
"""

from __future__ import annotations

import logging
import struct
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import hunl_kernel as HK
from .abstraction.actions import ActionMenuConfig
from .abstraction.buckets import (BucketMap, build_buckets, fnv1a64,
                                  sample_board_features)
from .cards import PAIR_INDEX
from .cfr import SolveReport
from .hunl import FLOP, PREFLOP, RIVER, TURN, RulesConfig

log = logging.getLogger(__name__)

STORE_MAGIC = b"DHBP"
STORE_VERSION = 1
MAX_PATH = 48


@dataclass(frozen=True)
class AbstractionProfile:
    name: str
    buckets: tuple[int, int, int, int]   # per round
    bins: int = 50
    kmeans_boards: tuple[int, int, int] = (120, 120, 300)  # flop/turn/river
    kmeans_pairs_per_board: int = 80
    seed: int = 17


def desk_profile() -> AbstractionProfile:
    return AbstractionProfile(name="desk", buckets=(169, 200, 100, 50))


def paper_profile() -> AbstractionProfile:
    """Table-scale bucket counts; training at this size is a cluster job."""
    return AbstractionProfile(name="paper", buckets=(169, 50_000, 5_000, 1_000),
                              kmeans_boards=(900, 900, 1500),
                              kmeans_pairs_per_board=200)


@dataclass(frozen=True)
class TrainingConfig:
    profile: AbstractionProfile = field(default_factory=desk_profile)
    rules: RulesConfig = field(default_factory=RulesConfig)
    menu: ActionMenuConfig = field(default_factory=ActionMenuConfig.table1)
    variant: str = "external-sampling"
    weighting: str = "linear"
    iterations: int = 1_000_000
    checkpoint_every: int = 0
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if self.iterations <= 0:
            raise ValueError("iterations must be positive")
        if self.variant != "external-sampling":
            raise ValueError("full-game training supports external sampling only")
        if self.workers != 1:
            raise ValueError("single-threaded deterministic mode only in v1")


def menu_bands_arrays(menu: ActionMenuConfig):
    """Numeric encoding of the menu bands for the nopython kernel."""
    lims = np.array([b[0] for b in menu.bands], dtype=np.int64)
    nb = len(menu.bands)
    width = max(len(b[1]) for b in menu.bands)
    kind = np.zeros((nb, width), dtype=np.int64)
    frac = np.zeros((nb, width), dtype=np.float64)
    length = np.zeros(nb, dtype=np.int64)
    for i, (_, tokens) in enumerate(menu.bands):
        length[i] = len(tokens)
        for j, tok in enumerate(tokens):
            if tok == "F":
                kind[i, j] = HK.KIND_FOLD
            elif tok == "C":
                kind[i, j] = HK.KIND_CALL
            elif tok == "A":
                kind[i, j] = HK.KIND_ALLIN
            else:
                kind[i, j] = HK.KIND_RAISE
                frac[i, j] = float(tok)
    return lims, kind, frac, length


def menu_fingerprint(menu: ActionMenuConfig) -> int:
    parts = []
    for lim, tokens in menu.bands:
        parts.append(str(lim))
        parts.extend(str(t) for t in tokens)
    return fnv1a64("|".join(parts).encode())


def maps_fingerprint(maps: dict[int, BucketMap]) -> int:
    blob = b"".join(struct.pack("<Q", maps[r].fingerprint())
                    for r in (PREFLOP, FLOP, TURN, RIVER))
    return fnv1a64(blob)


def build_bucket_maps(profile: AbstractionProfile,
                      cache_dir: str | Path | None = None) -> dict[int, BucketMap]:
    """Train (or load cached) bucket maps for all four rounds."""
    maps: dict[int, BucketMap] = {PREFLOP: BucketMap.preflop_identity()}
    if profile.buckets[PREFLOP] != 169:
        raise ValueError("preflop bucketing is the 169 canonical classes")
    cache = Path(cache_dir) if cache_dir else None
    for rnd, n_boards in ((FLOP, profile.kmeans_boards[0]),
                          (TURN, profile.kmeans_boards[1]),
                          (RIVER, profile.kmeans_boards[2])):
        k = profile.buckets[rnd]
        path = None
        if cache is not None:
            cache.mkdir(parents=True, exist_ok=True)
            path = cache / f"buckets_{profile.name}_r{rnd}_k{k}_s{profile.seed}.dhbk"
            if path.exists():
                maps[rnd] = BucketMap.load(path)
                continue
        t0 = time.time()
        feats = sample_board_features(rnd, n_boards, profile.seed + rnd,
                                      bins=profile.bins,
                                      pairs_per_board=profile.kmeans_pairs_per_board)
        bmap = build_buckets(feats, k, profile.seed + rnd, rnd,
                             bins=profile.bins)
        log.info("bucket map round %d: k=%d from %d samples in %.1fs",
                 rnd, k, feats.shape[0], time.time() - t0)
        maps[rnd] = bmap
        if path is not None:
            bmap.save(path)
    return maps


class Trainer:
    """Single-threaded deterministic MCCFR trainer on the abstract game."""

    GROW = 200_000

    def __init__(self, config: TrainingConfig, maps: dict[int, BucketMap]):
        self.config = config
        self.maps = maps
        self.bands = menu_bands_arrays(config.menu)
        cap = 1 << 20
        scap = 1 << 20
        self.regrets = np.zeros((cap, HK.MAX_MENU))
        self.stratsum = np.zeros((cap, HK.MAX_MENU))
        self.row_seq = np.zeros(cap, dtype=np.int64)
        self.row_bucket = np.zeros(cap, dtype=np.int32)
        self.row_round = np.zeros(cap, dtype=np.int8)
        self.row_actions = np.zeros(cap, dtype=np.int8)
        self.seq_parent = np.zeros(scap, dtype=np.int64)
        self.seq_action = np.zeros(scap, dtype=np.int8)
        self.counters = np.array([1, 0], dtype=np.int64)  # [n_seq, n_rows]; seq 0 = root
        self.seq_dict = HK.new_seq_dict()
        self.infoset_dict = HK.new_infoset_dict()
        self.rng = np.array([(config.seed * 0x9E3779B97F4A7C15 + 0xD1B54A32)
                             & 0xFFFFFFFFFFFFFFFF], dtype=np.uint64)
        self.t = 0
        self._cards = np.zeros(9, dtype=np.int64)
        self._buckets = np.zeros((2, 4), dtype=np.int64)
        self._kinds_s = np.zeros((HK.MAX_DEPTH, HK.MAX_MENU), dtype=np.int64)
        self._amts_s = np.zeros((HK.MAX_DEPTH, HK.MAX_MENU), dtype=np.int64)
        self._vals_s = np.zeros((HK.MAX_DEPTH, HK.MAX_MENU), dtype=np.float64)

    # -- capacity --------------------------------------------------------

    def _ensure_capacity(self):
        if self.counters[1] + 50_000 > self.regrets.shape[0]:
            new = self.regrets.shape[0] + max(self.GROW, self.regrets.shape[0] // 2)
            self.regrets = _grow2(self.regrets, new)
            self.stratsum = _grow2(self.stratsum, new)
            self.row_seq = _grow1(self.row_seq, new)
            self.row_bucket = _grow1(self.row_bucket, new)
            self.row_round = _grow1(self.row_round, new)
            self.row_actions = _grow1(self.row_actions, new)
        if self.counters[0] + 50_000 > self.seq_parent.shape[0]:
            new = self.seq_parent.shape[0] + max(self.GROW, self.seq_parent.shape[0] // 2)
            self.seq_parent = _grow1(self.seq_parent, new)
            self.seq_action = _grow1(self.seq_action, new)

    # -- iteration ---------------------------------------------------------

    def iterate(self, n: int = 1):
        rules = self.config.rules
        lims, kind, frac, length = self.bands
        linear = self.config.weighting == "linear"
        for _ in range(n):
            self.t += 1
            w = float(self.t) if linear else 1.0
            self._ensure_capacity()
            # one deal per iteration, shared by both traversals
            HK.deal_iteration(self.rng, self._cards)
            self._fill_buckets()
            sd = HK.showdown_sign(self._cards)
            for traverser in (0, 1):
                HK.walk_hunl(
                    traverser, 0, 0,
                    rules.small_blind + rules.big_blind,
                    rules.small_blind, rules.big_blind,
                    rules.starting_stack - rules.small_blind,
                    rules.starting_stack - rules.big_blind,
                    rules.big_blind, 0, 0, sd,
                    rules.starting_stack, rules.big_blind,
                    self._buckets, lims, kind, frac, length,
                    self.seq_dict, self.infoset_dict,
                    self.seq_parent, self.seq_action,
                    self.row_seq, self.row_bucket, self.row_round,
                    self.row_actions, self.counters,
                    self.regrets, self.stratsum, self.rng, w, w,
                    0, self._kinds_s, self._amts_s, self._vals_s)

    def _fill_buckets(self):
        c = self._cards
        board = c[4:9]
        i0 = PAIR_INDEX[c[0], c[1]]
        i1 = PAIR_INDEX[c[2], c[3]]
        b = self._buckets
        pre = self.maps[PREFLOP].buckets_for_board(())
        b[0, PREFLOP] = pre[i0]
        b[1, PREFLOP] = pre[i1]
        fl = self.maps[FLOP].buckets_for_board(board[:3])
        b[0, FLOP] = fl[i0]
        b[1, FLOP] = fl[i1]
        tn = self.maps[TURN].buckets_for_board(board[:4])
        b[0, TURN] = tn[i0]
        b[1, TURN] = tn[i1]
        rv = self.maps[RIVER].buckets_for_board(board[:5])
        b[0, RIVER] = rv[i0]
        b[1, RIVER] = rv[i1]

    # -- checkpointing -----------------------------------------------------

    def save_checkpoint(self, path):
        n_rows = int(self.counters[1])
        n_seq = int(self.counters[0])
        sk = np.empty(len(self.seq_dict), dtype=np.int64)
        sv = np.empty(len(self.seq_dict), dtype=np.int64)
        ns = HK.export_dict(self.seq_dict, sk, sv)
        ik = np.empty(len(self.infoset_dict), dtype=np.int64)
        iv = np.empty(len(self.infoset_dict), dtype=np.int64)
        ni = HK.export_dict(self.infoset_dict, ik, iv)
        np.savez_compressed(
            path,
            fingerprint=np.array([maps_fingerprint(self.maps),
                                  menu_fingerprint(self.config.menu)],
                                 dtype=np.uint64),
            t=np.array([self.t], dtype=np.int64),
            rng=self.rng,
            counters=self.counters,
            regrets=self.regrets[:n_rows],
            stratsum=self.stratsum[:n_rows],
            row_seq=self.row_seq[:n_rows],
            row_bucket=self.row_bucket[:n_rows],
            row_round=self.row_round[:n_rows],
            row_actions=self.row_actions[:n_rows],
            seq_parent=self.seq_parent[:n_seq],
            seq_action=self.seq_action[:n_seq],
            seq_keys=sk[:ns], seq_vals=sv[:ns],
            info_keys=ik[:ni], info_vals=iv[:ni],
        )

    @classmethod
    def resume(cls, config: TrainingConfig, maps: dict[int, BucketMap],
               path) -> "Trainer":
        data = np.load(path)
        fp = data["fingerprint"]
        if int(fp[0]) != maps_fingerprint(maps) or int(fp[1]) != menu_fingerprint(config.menu):
            raise ValueError("checkpoint abstraction fingerprints do not match")
        tr = cls(config, maps)
        n_rows = int(data["counters"][1])
        n_seq = int(data["counters"][0])
        cap = max(tr.regrets.shape[0], n_rows + cls.GROW)
        scap = max(tr.seq_parent.shape[0], n_seq + cls.GROW)
        tr.regrets = np.zeros((cap, HK.MAX_MENU))
        tr.stratsum = np.zeros((cap, HK.MAX_MENU))
        tr.row_seq = np.zeros(cap, dtype=np.int64)
        tr.row_bucket = np.zeros(cap, dtype=np.int32)
        tr.row_round = np.zeros(cap, dtype=np.int8)
        tr.row_actions = np.zeros(cap, dtype=np.int8)
        tr.seq_parent = np.zeros(scap, dtype=np.int64)
        tr.seq_action = np.zeros(scap, dtype=np.int8)
        tr.regrets[:n_rows] = data["regrets"]
        tr.stratsum[:n_rows] = data["stratsum"]
        tr.row_seq[:n_rows] = data["row_seq"]
        tr.row_bucket[:n_rows] = data["row_bucket"]
        tr.row_round[:n_rows] = data["row_round"]
        tr.row_actions[:n_rows] = data["row_actions"]
        tr.seq_parent[:n_seq] = data["seq_parent"]
        tr.seq_action[:n_seq] = data["seq_action"]
        tr.counters = data["counters"].copy()
        tr.rng = data["rng"].copy()
        tr.t = int(data["t"][0])
        HK.import_dict(tr.seq_dict, data["seq_keys"], data["seq_vals"],
                       len(data["seq_keys"]))
        HK.import_dict(tr.infoset_dict, data["info_keys"], data["info_vals"],
                       len(data["info_keys"]))
        return tr

    # -- export -------------------------------------------------------------

    def to_store(self) -> "StrategyStore":
        n_rows = int(self.counters[1])
        path_buf = np.zeros(MAX_PATH, dtype=np.int8)
        records = []
        for i in range(n_rows):
            probs = self.stratsum[i, : self.row_actions[i]]
            tot = probs.sum()
            if tot <= 0:
                continue
            plen = HK.seq_path(int(self.row_seq[i]), self.seq_parent,
                               self.seq_action, path_buf)
            key = _pack_key(int(self.row_round[i]), int(self.row_bucket[i]),
                            bytes(path_buf[:plen].astype(np.uint8)))
            records.append((key, (probs / tot).astype(np.float64)))
        return StrategyStore.from_records(
            records,
            fingerprints=(maps_fingerprint(self.maps),
                          menu_fingerprint(self.config.menu)),
            iterations=self.t, seed=self.config.seed)


def _grow1(a, n):
    out = np.zeros(n, dtype=a.dtype)
    out[: a.shape[0]] = a
    return out


def _grow2(a, n):
    out = np.zeros((n, a.shape[1]), dtype=a.dtype)
    out[: a.shape[0]] = a
    return out


def _pack_key(rnd: int, bucket: int, path: bytes) -> bytes:
    return struct.pack("<BIB", rnd, bucket, len(path)) + path


class StrategyStore:
    """Persisted blueprint: sorted (key -> distribution) records behind a
    hash index, with abstraction fingerprints and a trailing checksum."""

    def __init__(self, blob: bytes):
        if blob[:4] != STORE_MAGIC:
            raise ValueError("bad magic: not a strategy store")
        (version,) = struct.unpack_from("<I", blob, 4)
        if version != STORE_VERSION:
            raise ValueError(f"unsupported store version {version}")
        (stored,) = struct.unpack_from("<Q", blob, len(blob) - 8)
        if fnv1a64(blob[:-8]) != stored:
            raise ValueError("store checksum mismatch")
        (self.fp_cards, self.fp_actions, self.iterations, self.seed,
         self.n_records, compact) = struct.unpack_from("<QQQQQB", blob, 8)
        self.compact = bool(compact)
        off = 8 + 41
        self._hashes = np.frombuffer(blob, dtype="<u8", count=self.n_records,
                                     offset=off)
        off += 8 * self.n_records
        self._offsets = np.frombuffer(blob, dtype="<u8", count=self.n_records,
                                      offset=off)
        off += 8 * self.n_records
        self._records = blob[off:-8]
        self.blob = blob
        self._warned = set()

    # -- construction -----------------------------------------------------

    @classmethod
    def from_records(cls, records, fingerprints, iterations, seed,
                     compact: bool = False) -> "StrategyStore":
        items = []
        for key, probs in records:
            h = fnv1a64(key)
            items.append((h, key, probs))
        items.sort(key=lambda x: (x[0], x[1]))
        rec_blob = bytearray()
        hashes = np.empty(len(items), dtype="<u8")
        offsets = np.empty(len(items), dtype="<u8")
        for i, (h, key, probs) in enumerate(items):
            hashes[i] = h
            offsets[i] = len(rec_blob)
            rec_blob += struct.pack("<H", len(key)) + key
            rec_blob += struct.pack("<B", len(probs))
            if compact:
                q = np.clip(np.round(np.asarray(probs) * 65535), 0, 65535)
                rec_blob += q.astype("<u2").tobytes()
            else:
                rec_blob += np.asarray(probs, dtype="<f8").tobytes()
        head = STORE_MAGIC + struct.pack("<I", STORE_VERSION)
        head += struct.pack("<QQQQQB", fingerprints[0], fingerprints[1],
                            iterations, seed, len(items), int(compact))
        blob = head + hashes.tobytes() + offsets.tobytes() + bytes(rec_blob)
        blob += struct.pack("<Q", fnv1a64(blob))
        return cls(blob)

    def save(self, path) -> None:
        tmp = Path(str(path) + ".tmp")
        tmp.write_bytes(self.blob)
        tmp.replace(path)  # atomic publish

    @classmethod
    def load(cls, path) -> "StrategyStore":
        return cls(Path(path).read_bytes())

    # -- queries -----------------------------------------------------------

    def verify_fingerprints(self, maps: dict[int, BucketMap],
                            menu: ActionMenuConfig) -> None:
        if self.fp_cards != maps_fingerprint(maps) or \
                self.fp_actions != menu_fingerprint(menu):
            raise ValueError("store abstraction fingerprints do not match"
                             " the live abstraction")

    def _record_at(self, i: int):
        off = int(self._offsets[i])
        (klen,) = struct.unpack_from("<H", self._records, off)
        key = self._records[off + 2 : off + 2 + klen]
        off2 = off + 2 + klen
        (n,) = struct.unpack_from("<B", self._records, off2)
        off2 += 1
        if self.compact:
            q = np.frombuffer(self._records, dtype="<u2", count=n, offset=off2)
            probs = q.astype(np.float64)
            tot = probs.sum()
            probs = probs / tot if tot > 0 else np.full(n, 1.0 / n)
        else:
            probs = np.frombuffer(self._records, dtype="<f8", count=n,
                                  offset=off2).copy()
        return key, probs

    def lookup(self, rnd: int, bucket: int, path) -> np.ndarray | None:
        """Stored distribution for an infoset, or None when unvisited."""
        key = _pack_key(rnd, bucket, bytes(path))
        h = fnv1a64(key)
        i = int(np.searchsorted(self._hashes, h))
        while i < self.n_records and self._hashes[i] == h:
            k, probs = self._record_at(i)
            if k == key:
                return probs
            i += 1
        return None

    def query(self, rnd: int, bucket: int, path, n_actions: int) -> np.ndarray:
        """Stored average distribution; uniform (with a logged warning) for
        infosets never visited in training."""
        probs = self.lookup(rnd, bucket, path)
        if probs is not None:
            if len(probs) != n_actions:
                raise ValueError(
                    f"stored distribution has {len(probs)} actions, node has"
                    f" {n_actions}: abstraction mismatch")
            return probs
        tag = (rnd, bucket, bytes(path))
        if tag not in self._warned:
            self._warned.add(tag)
            log.warning("unvisited infoset round=%d bucket=%d path=%s; uniform",
                        rnd, bucket, list(path))
        return np.full(n_actions, 1.0 / n_actions)


def train(config: TrainingConfig, maps: dict[int, BucketMap] | None = None,
          resume_from=None, checkpoint_dir=None,
          cache_dir=None) -> tuple[StrategyStore, SolveReport]:
    """Run blueprint training per config; returns the store and a report."""
    maps = maps or build_bucket_maps(config.profile, cache_dir)
    if resume_from is not None:
        trainer = Trainer.resume(config, maps, resume_from)
    else:
        trainer = Trainer(config, maps)
    report = SolveReport(game="hunl-abstract", variant=config.variant,
                         weighting=config.weighting, seed=config.seed)
    t0 = time.time()
    ck = config.checkpoint_every
    while trainer.t < config.iterations:
        step = min(ck if ck else 20_000, config.iterations - trainer.t)
        trainer.iterate(step)
        if ck and checkpoint_dir is not None:
            Path(checkpoint_dir).mkdir(parents=True, exist_ok=True)
            trainer.save_checkpoint(Path(checkpoint_dir) / f"ckpt_{trainer.t}.npz")
        log.info("trained %d/%d iterations (%.0f s, %d infosets)",
                 trainer.t, config.iterations, time.time() - t0,
                 int(trainer.counters[1]))
    report.iterations = trainer.t
    report.wall_time = time.time() - t0
    store = trainer.to_store()
    return store, report
