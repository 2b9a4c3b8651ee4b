"""Spectrum exploration: exhaustive scans of tiny spaces, seeded random walks with
incremental evaluation and resumable checkpoints, and target search."""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from itertools import permutations
from pathlib import Path

import numpy as np

from . import _kernels as K
from .affinity import AffinityState, Permutation, count_affinity, kernel_tables
from .errors import CheckpointCorrupt, InternalInvariantViolation, TooLarge
from .geometry import count_flats, flat_table, space

CHECKPOINT_VERSION = 1
EXHAUSTIVE_MAX_POINTS = 9


def budget_cap(budget: int) -> int:
    """Apply the AFFINITYLAB_BUDGET environment override, if set."""
    env = os.environ.get("AFFINITYLAB_BUDGET")
    if env:
        return min(budget, int(env))
    return budget


@dataclass
class SearchConfig:
    moves: str = "transposition"      # or "transposition+3cycle"
    budget: int = 10 ** 6             # evaluations (one per move)
    restart_every: int = 1000         # walks last uniform 1..restart_every moves
    seed: int = 0
    walkers: int = 1
    threads: int = 1
    checkpoint: str | None = None
    checkpoint_every: int = 10 ** 6
    stall: int = 10 ** 4              # target search: moves without improvement before restart

    def __post_init__(self):
        if self.budget <= 0:
            raise ValueError("budget must be positive")
        if self.moves not in ("transposition", "transposition+3cycle"):
            raise ValueError(f"unknown move set {self.moves!r}")
        if self.walkers < 1 or self.restart_every < 1:
            raise ValueError("walkers and restart_every must be positive")

    def identity_fields(self) -> dict:
        # fields that must agree between a checkpoint and the run resuming it
        return {"moves": self.moves, "restart_every": self.restart_every, "seed": self.seed,
                "walkers": self.walkers}


@dataclass
class SpectrumResult:
    n: int
    k: int
    q: int
    values: list[int]
    witnesses: dict[int, Permutation]
    mode: str
    budget_used: int
    seed: int | None = None
    coverage: dict = field(default_factory=dict)

    def verify(self, method: str = "table") -> bool:
        """Recount every witness from scratch with a non-incremental route."""
        for v in self.values:
            w = self.witnesses[v]
            if count_affinity(w, self.k, method) != v:
                return False
        return True

    def to_json(self) -> dict:
        return {"n": self.n, "k": self.k, "q": self.q, "values": list(self.values),
                "mode": self.mode, "budget_used": self.budget_used, "seed": self.seed,
                "witnesses": {str(v): [int(x) for x in self.witnesses[v].images]
                              for v in self.values},
                "coverage": self.coverage}


# -- exhaustive ---------------------------------------------------------------------

def all_permutations(size: int) -> np.ndarray:
    """Every permutation of range(size) in lexicographic order."""
    return np.array(list(permutations(range(size))), dtype=np.int8).reshape(-1, size)


def exhaustive_affinities(n: int, q: int, k: int, perms: np.ndarray | None = None) -> np.ndarray:
    """k-affinity of every permutation of F_q^n (rows of perms, lexicographic by default).

    Each flat's image is turned into a bitmask of its points and looked up in a
    table of all flat masks.
    """
    N = q ** n
    if N > EXHAUSTIVE_MAX_POINTS:
        raise TooLarge(f"exhaustive scans need q^n <= {EXHAUSTIVE_MAX_POINTS}, got {N}")
    if perms is None:
        perms = all_permutations(N)
    table = flat_table(n, k, q)
    bit = (np.int64(1) << np.arange(N, dtype=np.int64))
    is_flat_mask = np.zeros(1 << N, dtype=bool)
    is_flat_mask[bit[table.points.astype(np.int64)].sum(axis=1)] = True
    aff = np.zeros(len(perms), dtype=np.int64)
    for row in table.points:
        masks = bit[perms[:, row].astype(np.int64)].sum(axis=1)
        aff += is_flat_mask[masks]
    return aff


def exhaustive_spectrum(n: int, q: int, k: int) -> SpectrumResult:
    if q ** n > EXHAUSTIVE_MAX_POINTS:
        raise TooLarge(f"exhaustive scans need q^n <= {EXHAUSTIVE_MAX_POINTS}, got {q ** n}")
    perms = all_permutations(q ** n)
    aff = exhaustive_affinities(n, q, k, perms)
    values, first = np.unique(aff, return_index=True)
    witnesses = {int(v): Permutation(n, q, perms[i].astype(np.int64), check=False)
                 for v, i in zip(values, first)}
    return SpectrumResult(n, k, q, [int(v) for v in values], witnesses, "exhaustive",
                          len(perms))


# -- random walk --------------------------------------------------------------------

class _Walker:
    """One seeded random walk over Per(F_q^n) with its own AffinityState."""

    def __init__(self, n, q, k, config: SearchConfig, wid: int, starts: list[Permutation]):
        self.n, self.q, self.k, self.wid = n, q, k, wid
        self.config = config
        ss = np.random.SeedSequence([config.seed, wid])
        walk_seq, start_seq = ss.spawn(2)
        self.rng = np.random.Generator(np.random.PCG64(walk_seq))
        if not starts:
            srng = np.random.default_rng(start_seq)
            starts = [Permutation.identity(n, q),
                      Permutation(n, q, srng.permutation(q ** n), check=False)]
        self.table = flat_table(n, k, q)
        self.points = self.table.points.astype(np.int64)
        self.by_point = self.table.by_point
        self.coords = space(n, q).coords
        _, self.sub, self.mul, self.inv = kernel_tables(q)
        self.start_images = np.stack([s.images for s in starts]).astype(np.int64)
        self.start_status = np.stack([self._status(s.images) for s in starts])
        self.start_aff = self.start_status.sum(axis=1).astype(np.int64)
        self.images = self.start_images[0].copy()
        self.status = self.start_status[0].copy()
        self.affinity = int(self.start_aff[0])
        self.walk_state = np.array([0, 0, 1 % len(starts)], dtype=np.int64)
        self.used = 0
        self.seen = np.zeros(len(self.table) + 1, dtype=np.bool_)
        self.witnesses: dict[int, np.ndarray] = {}
        self.first_seen: dict[int, int] = {}
        for s, a in zip(self.start_images, self.start_aff):
            self._record(int(a), s)

    def _status(self, images):
        return K.table_status(images, self.points, self.coords, self.k, self.n, self.q,
                              self.sub, self.mul, self.inv)

    def _record(self, value: int, images: np.ndarray):
        if self.q == 2 and self.k == self.n - 1 and (value + 2) & (value + 1):
            raise InternalInvariantViolation(
                f"(n-1)-affinity {value} is not of the form 2^i - 2")
        if not self.seen[value]:
            self.seen[value] = True
            self.witnesses[value] = images.copy()
            self.first_seen[value] = self.used

    def run(self, steps: int, chunk: int = 1 << 16):
        """Advance by up to ``steps`` moves.  The RNG is rewound so that it has
        consumed exactly four doubles per executed move."""
        target = self.used + steps
        three = self.config.moves == "transposition+3cycle"
        while self.used < target:
            m = min(chunk, target - self.used)
            saved = self.rng.bit_generator.state
            draws = self.rng.random(4 * m)
            done, aff, new = K.walk(self.images, self.status, self.affinity, self.by_point,
                                    self.points, self.coords, self.k, self.n, self.q, self.sub,
                                    self.mul, self.inv, draws, m, self.config.restart_every,
                                    three, self.start_images, self.start_status, self.start_aff,
                                    self.walk_state, self.seen)
            if done < m:
                self.rng.bit_generator.state = saved
                self.rng.bit_generator.advance(4 * done)
            self.used += done
            self.affinity = int(aff)
            if new:
                self._record(self.affinity, self.images)

    # -- checkpoint state ----------------------------------------------------------
    def state_dict(self) -> dict:
        return {"wid": self.wid, "rng": self.rng.bit_generator.state,
                "images": self.images.tolist(), "affinity": self.affinity,
                "walk_state": self.walk_state.tolist(), "used": self.used,
                "witnesses": {str(v): w.tolist() for v, w in self.witnesses.items()},
                "first_seen": {str(v): s for v, s in self.first_seen.items()},
                "starts": self.start_images.tolist()}

    def load_state(self, d: dict):
        self.rng.bit_generator.state = d["rng"]
        self.images = np.array(d["images"], dtype=np.int64)
        self.status = self._status(self.images)
        self.affinity = int(self.status.sum())
        if self.affinity != d["affinity"]:
            raise CheckpointCorrupt("stored affinity does not match the stored permutation")
        self.walk_state = np.array(d["walk_state"], dtype=np.int64)
        self.used = int(d["used"])
        self.seen[:] = False
        self.witnesses = {}
        for v, w in d["witnesses"].items():
            self.seen[int(v)] = True
            self.witnesses[int(v)] = np.array(w, dtype=np.int64)
        self.first_seen = {int(v): int(s) for v, s in d["first_seen"].items()}


def _write_checkpoint(path, n, q, k, config: SearchConfig, walkers: list[_Walker]):
    body = {"version": CHECKPOINT_VERSION, "n": n, "q": q, "k": k,
            "config": asdict(config), "walkers": [w.state_dict() for w in walkers]}
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(json.dumps(body))
    os.replace(tmp, path)


def load_checkpoint(path) -> dict:
    try:
        body = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise CheckpointCorrupt(f"cannot read checkpoint {path}: {exc}") from exc
    required = {"version", "n", "q", "k", "config", "walkers"}
    if not isinstance(body, dict) or not required <= body.keys():
        raise CheckpointCorrupt(f"checkpoint {path} is missing fields")
    if body["version"] != CHECKPOINT_VERSION:
        raise CheckpointCorrupt(f"unsupported checkpoint version {body['version']}")
    return body


def random_spectrum(n: int, q: int, k: int, config: SearchConfig,
                    starts: list[Permutation] | None = None,
                    reference: set[int] | None = None) -> SpectrumResult:
    """Random transposition walks, accumulating every affinity value visited.

    Walkers are independent (seeds derived from config.seed and the walker id)
    and only parallelized by config.threads, so results do not depend on it.
    With config.checkpoint set, an existing file is resumed and the state is
    written atomically every config.checkpoint_every moves per walker.
    """
    budget = budget_cap(config.budget)
    starts = list(starts or [])
    walkers = [_Walker(n, q, k, config, w, starts) for w in range(config.walkers)]
    ck = config.checkpoint
    if ck and Path(ck).exists():
        body = load_checkpoint(ck)
        if (body["n"], body["q"], body["k"]) != (n, q, k):
            raise CheckpointCorrupt("checkpoint is for different parameters")
        stored = SearchConfig(**body["config"]).identity_fields()
        if stored != config.identity_fields() or len(body["walkers"]) != len(walkers):
            raise CheckpointCorrupt("checkpoint was written with a different search config")
        for w, d in zip(walkers, body["walkers"]):
            if np.array(d["starts"]).tolist() != w.start_images.tolist():
                raise CheckpointCorrupt("checkpoint was written with different start points")
            w.load_state(d)
    shares = [budget // len(walkers) + (1 if i < budget % len(walkers) else 0)
              for i in range(len(walkers))]
    step = config.checkpoint_every if ck else max(shares + [1])
    with ThreadPoolExecutor(max_workers=max(1, config.threads)) as pool:
        while any(w.used < s for w, s in zip(walkers, shares)):
            jobs = [pool.submit(w.run, min(step, s - w.used))
                    for w, s in zip(walkers, shares) if w.used < s]
            for j in jobs:
                j.result()
            if ck:
                _write_checkpoint(ck, n, q, k, config, walkers)
    values: dict[int, Permutation] = {}
    for w in walkers:  # lowest walker id wins
        for v in sorted(w.witnesses):
            values.setdefault(v, Permutation(n, q, w.witnesses[v], check=False))
    res = SpectrumResult(n, k, q, sorted(values), values, "random",
                         sum(w.used for w in walkers), config.seed)
    if reference is not None:
        hit = sorted(set(res.values) & set(reference))
        res.coverage = {"reference_size": len(reference), "covered": len(hit),
                        "percent": 100.0 * len(hit) / max(1, len(reference)),
                        "outside_reference": sorted(set(res.values) - set(reference))}
    return res


# -- target search -------------------------------------------------------------------

@dataclass
class TargetResult:
    witness: Permutation | None
    evaluations: int
    restarts: int
    best_distance: int

    @property
    def found(self) -> bool:
        return self.witness is not None


def target_search(n: int, q: int, target: dict[int, int], config: SearchConfig,
                  start: Permutation | None = None) -> TargetResult:
    """Hill-climb on sum_k |k-affinity - target_k| with sideways moves and restarts.

    Ties are broken by the coaffinity at the smallest requested k.  After
    config.stall moves without strict improvement the walk restarts from a
    random permutation.  A miss is not a proof that no witness exists.
    """
    if not target:
        raise ValueError("empty target")
    for kk, v in target.items():
        if not 0 <= v <= count_flats(n, kk, q):
            raise ValueError(f"target {kk}={v} is out of range")
    budget = budget_cap(config.budget)
    rng = np.random.default_rng(config.seed)
    ks = sorted(target)
    N = q ** n

    def fresh(perm):
        return {kk: AffinityState(perm, kk) for kk in ks}

    def score(states):
        dist = sum(abs(states[kk].affinity - target[kk]) for kk in ks)
        return dist, states[ks[0]].coaffinity

    states = fresh(start or Permutation(n, q, rng.permutation(N), check=False))
    cur = score(states)
    best = cur[0]
    evals = restarts = stall = 0
    while True:
        if cur[0] == 0:
            return TargetResult(states[ks[0]].perm.copy(), evals, restarts, 0)
        if evals >= budget:
            return TargetResult(None, evals, restarts, best)
        u, v = rng.choice(N, size=2, replace=False)
        for s in states.values():
            s.apply_transposition_delta(u, v)
        evals += 1
        new = score(states)
        if new <= cur:
            stall = 0 if new < cur else stall + 1
            cur = new
            best = min(best, cur[0])
        else:
            for s in states.values():
                s.apply_transposition_delta(u, v)
            stall += 1
        if stall >= config.stall:
            states = fresh(Permutation(n, q, rng.permutation(N), check=False))
            cur = score(states)
            best = min(best, cur[0])
            restarts += 1
            stall = 0
