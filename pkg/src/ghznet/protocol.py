"""One protocol cycle and rate estimation over many cycles.

A cycle runs in three stages that share one per-trial generator:

1. :func:`sample_link_outcomes` draws each link (and optional thinning),
2. :func:`select_fusions` picks, per helper, the qubits to fuse,
3. :func:`resolve_cycle` draws fusion successes and glues active memory
   vertices with a union-find.

:func:`count_shared_ghz` then reads off the GHZ states shared by the
consumers. Random draws are consumed in a fixed order whose sizes depend
only on the topology, so equal seeds couple runs at different ``p``/``q``.
"""
from __future__ import annotations

import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .topology import BLACK, RED, Topology

VARIANTS = ("nGHZ-random", "brickwork", "divided-nGHZ")


@dataclass(frozen=True)
class ProtocolConfig:
    """Protocol variant and probabilities.

    ``n`` caps the fusion size (4 and 3 give the 4-GHZ and 3-GHZ grid
    protocols, 2 the Bell-measurement-only protocol). ``p_star`` enables
    thinning: when ``p > p_star`` each successful link is dropped with
    probability ``(p - p_star) / p``.
    """

    variant: str = "nGHZ-random"
    n: int = 4
    p: float = 1.0
    q: float = 1.0
    p_star: float | None = None
    trials: int = 1000
    seed: int = 0

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if self.n < 1:
            raise ValueError("n must be >= 1")
        for name in ("p", "q"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {value}")
        if self.p_star is not None and not 0.0 < self.p_star <= 1.0:
            raise ValueError(f"p_star must lie in (0, 1], got {self.p_star}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")

    def replace(self, **changes) -> "ProtocolConfig":
        from dataclasses import replace

        return replace(self, **changes)

    @property
    def effective_p(self) -> float:
        if self.p_star is not None and self.p > self.p_star:
            return self.p_star
        return self.p


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Generator for one trial, independent of how trials are scheduled."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(trial,)))


@dataclass(frozen=True)
class LinkOutcome:
    ok: np.ndarray  # per edge


@dataclass(frozen=True)
class FusionPlan:
    in_fusion: np.ndarray  # per memory vertex
    measured: np.ndarray  # per memory vertex, X-basis measured
    planned: np.ndarray  # per node, a fusion of size >= 2 is attempted

    def fusion_set(self, topology: Topology, node: int) -> list[int]:
        return [int(v) for v in topology.memory_vertices(node) if self.in_fusion[v]]

    def measured_set(self, topology: Topology, node: int) -> list[int]:
        return [int(v) for v in topology.memory_vertices(node) if self.measured[v]]


@dataclass
class ComponentSet:
    """Resolved union-find over memory vertices for one cycle."""

    parent: np.ndarray
    active: np.ndarray
    fusion_ok: np.ndarray  # per node

    def root(self, v: int) -> int:
        return int(self.parent[v])

    def components(self) -> list[set[int]]:
        groups: dict[int, set[int]] = {}
        for v in np.flatnonzero(self.active):
            groups.setdefault(int(self.parent[v]), set()).add(int(v))
        return sorted(groups.values(), key=min)

    def sizes(self) -> list[int]:
        return sorted(len(c) for c in self.components())


def sample_link_outcomes(topology: Topology, config: ProtocolConfig,
                         rng: np.random.Generator) -> LinkOutcome:
    ok = rng.random(topology.n_edges) < config.p
    if config.p_star is not None:
        drop = rng.random(topology.n_edges)
        if config.p > config.p_star:
            ok &= drop >= (config.p - config.p_star) / config.p
    return LinkOutcome(ok)


def select_fusions(topology: Topology, links: LinkOutcome, config: ProtocolConfig,
                   rng: np.random.Generator) -> FusionPlan:
    """Choose each helper's fusion set from its successful links.

    Up to ``n`` successful qubits are fused; beyond that a uniformly random
    ``n``-subset is fused and the rest X-measured. The brickwork variant
    fuses black-link qubits first and adds red-link qubits only while fewer
    than ``n`` black qubits are available. A helper left with a single
    qubit X-measures it. Consumers never fuse.
    """
    brickwork = config.variant == "brickwork"
    if brickwork and ((topology.color != BLACK) & (topology.color != RED)).any():
        raise ValueError("brickwork variant needs a black/red coloured topology")
    if config.variant == "divided-nGHZ" and (topology.partition < 0).any():
        raise ValueError("divided-nGHZ variant needs a divided topology")
    keys = rng.random(topology.n_vertices)
    n_vert = topology.n_vertices
    in_fusion = np.zeros(n_vert, dtype=np.bool_)
    measured = np.zeros(n_vert, dtype=np.bool_)
    planned = np.zeros(topology.n_nodes, dtype=np.bool_)
    ptr, verts = topology.incidence
    _kernels.select_fusions(ptr, verts, topology.roles, links.ok, topology.color, keys,
                            config.n, brickwork, in_fusion, measured, planned)
    return FusionPlan(in_fusion, measured, planned)


def resolve_cycle(topology: Topology, links: LinkOutcome, plan: FusionPlan,
                  config: ProtocolConfig, rng: np.random.Generator) -> ComponentSet:
    """Draw fusion outcomes and build the post-fusion components.

    A memory vertex is active when a consumer holds it or it took part in
    a successful fusion. Members of a successful fusion are joined, and a
    successful link joins its two ends when both are active.
    """
    fusion_ok = rng.random(topology.n_nodes) < config.q
    parent = np.empty(topology.n_vertices, dtype=np.int64)
    active = np.empty(topology.n_vertices, dtype=np.bool_)
    ptr, verts = topology.incidence
    _kernels.resolve(ptr, verts, topology.vertex_node, topology.roles, links.ok,
                     plan.in_fusion, plan.planned, fusion_ok, parent, active)
    return ComponentSet(parent, active, fusion_ok)


def count_shared_ghz(components: ComponentSet, topology: Topology):
    """Number of components holding memories of both consumers, and their splits.

    Returns ``(count, sizes)`` where ``sizes`` lists ``(m_A, m_B)`` per
    shared component, sorted.
    """
    parent = components.parent
    roots_a = Counter(parent[topology.memory_vertices(topology.consumer_a)].tolist())
    roots_b = Counter(parent[topology.memory_vertices(topology.consumer_b)].tolist())
    sizes = sorted((roots_a[r], roots_b[r]) for r in roots_a.keys() & roots_b.keys())
    return len(sizes), sizes


def run_cycle(topology: Topology, config: ProtocolConfig, rng: np.random.Generator):
    links = sample_link_outcomes(topology, config, rng)
    plan = select_fusions(topology, links, config, rng)
    return links, plan, resolve_cycle(topology, links, plan, config, rng)


@dataclass
class RateEstimate:
    """Shared-GHZ count per cycle over ``trials`` independent cycles."""

    mean: float
    stderr: float
    trials: int
    count_hist: np.ndarray
    size_hist: Counter = field(default_factory=Counter)
    counts: np.ndarray | None = field(default=None, repr=False)

    @property
    def connection_probability(self) -> float:
        return 1.0 - self.count_hist[0] / self.trials

    @property
    def connection_stderr(self) -> float:
        c = self.connection_probability
        return math.sqrt(c * (1 - c) / self.trials)


def _run_trials(topology, config, trials):
    counts = np.zeros(len(trials), dtype=np.int64)
    sizes = Counter()
    for i, t in enumerate(trials):
        _, _, comps = run_cycle(topology, config, trial_rng(config.seed, t))
        counts[i], split = count_shared_ghz(comps, topology)
        sizes.update(split)
    return counts, sizes


def estimate_rate(topology: Topology, config: ProtocolConfig, workers: int = 1) -> RateEstimate:
    """Mean number of consumer-shared GHZ states per cycle.

    Trial ``t`` uses :func:`trial_rng` ``(config.seed, t)``; results are
    identical for any ``workers``.
    """
    if topology.consumer_a is None or topology.consumer_b is None:
        raise ValueError("topology has no consumers")
    trials = np.arange(config.trials)
    if workers > 1:
        chunks = np.array_split(trials, workers)
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(lambda c: _run_trials(topology, config, c), chunks))
        counts = np.concatenate([c for c, _ in parts])
        sizes = sum((s for _, s in parts), Counter())
    else:
        counts, sizes = _run_trials(topology, config, trials)
    T = config.trials
    mean = float(counts.mean())
    stderr = float(counts.std(ddof=1) / math.sqrt(T)) if T > 1 else 0.0
    return RateEstimate(mean, stderr, T, np.bincount(counts, minlength=5), sizes, counts)


@dataclass(frozen=True)
class GhzRecord:
    qubits: frozenset

    @property
    def size(self) -> int:
        return len(self.qubits)


def fuse_ghz_records(records, fused_qubits, success: bool, allow_shared: bool = False):
    """Apply one fusion (or, with ``success=False``, X measurements) to GHZ records.

    On success the records touched by ``fused_qubits`` merge into one record
    holding their unmeasured qubits (size ``sum(m_i) - n``). On failure each
    touched record only loses its fused qubits. Empty records are dropped.
    ``allow_shared`` permits several fused qubits from one record, which
    happens when fusions close a loop.
    """
    fused = set(fused_qubits)
    if len(fused) != len(fused_qubits):
        raise ValueError("fused qubits must be distinct")
    owner = {}
    for i, rec in enumerate(records):
        for qb in rec.qubits & fused:
            owner[qb] = i
    missing = fused - owner.keys()
    if missing:
        raise ValueError(f"fused qubit(s) {sorted(missing)} not found in any record")
    touched = Counter(owner.values())
    if not allow_shared and any(c > 1 for c in touched.values()):
        raise ValueError("two fused qubits belong to the same record")

    out = [rec for i, rec in enumerate(records) if i not in touched]
    if success:
        merged = frozenset().union(*(records[i].qubits for i in touched)) - fused
        if merged:
            out.append(GhzRecord(merged))
    else:
        for i in sorted(touched):
            rest = records[i].qubits - fused
            if rest:
                out.append(GhzRecord(rest))
    return out
