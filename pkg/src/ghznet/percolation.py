"""Monte Carlo percolation measurements on top of the protocol simulator.

Thresholds come from bisection on a connectivity observable, always with
the same trial seeds so that the observable is coupled across the
bisection points. Three observables (criteria) are available:

``spanning``
    probability that one post-fusion component touches both the left and
    the right boundary column of a grid;
``consumer``
    probability that the two consumers share at least one GHZ state;
``giant``
    mean fraction of nodes touching the largest component.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from . import _kernels
from .protocol import ProtocolConfig, count_shared_ghz, run_cycle, trial_rng
from .topology import HELPER, Topology

CRITERIA = ("spanning", "consumer", "giant")


@dataclass
class CriticalCurve:
    """Threshold samples ``(p, q_c, uncertainty)``; ``nan`` marks no threshold."""

    p: np.ndarray
    q_c: np.ndarray
    uncertainty: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.p = np.asarray(self.p, dtype=float)
        self.q_c = np.asarray(self.q_c, dtype=float)
        self.uncertainty = np.asarray(self.uncertainty, dtype=float)
        if len(self.p) > 1 and not (np.diff(self.p) > 0).all():
            raise ValueError("p samples must be strictly increasing")
        finite = ~np.isnan(self.q_c)
        if ((self.q_c[finite] < 0) | (self.q_c[finite] > 1)).any():
            raise ValueError("q_c outside [0, 1]")
        if (self.uncertainty[finite] < 0).any():
            raise ValueError("negative uncertainty")

    def rows(self):
        for p, q, u in zip(self.p, self.q_c, self.uncertainty):
            yield float(p), (None if np.isnan(q) else float(q)), (None if np.isnan(u) else float(u))


@dataclass
class SweepResult:
    """Canonical observables on a ``p`` grid, as ``(mean, stderr)`` arrays."""

    p: np.ndarray
    values: dict
    trials: int
    microcanonical: dict = field(default_factory=dict, repr=False)

    def mean(self, name):
        return self.values[name][0]

    def stderr(self, name):
        return self.values[name][1]


@dataclass(frozen=True)
class CriticalPoint:
    value: float
    uncertainty: float
    finite_size: bool
    criterion: str
    observed: float
    stderr: float


def _boundary_columns(topology: Topology):
    if not topology.is_grid:
        raise ValueError("spanning criterion needs a square grid")
    xs = topology.coords[:, 0]
    return np.flatnonzero(xs == 0), np.flatnonzero(xs == topology.width - 1)


def _trial_values(topology: Topology, config: ProtocolConfig, criterion: str,
                  workers: int = 1) -> np.ndarray:
    if criterion not in CRITERIA:
        raise ValueError(f"criterion must be one of {CRITERIA}")
    ptr, verts = topology.incidence
    if criterion == "spanning":
        left, right = _boundary_columns(topology)

    def one(t):
        links, _, comps = run_cycle(topology, config, trial_rng(config.seed, t))
        if criterion == "consumer":
            return float(count_shared_ghz(comps, topology)[0] > 0)
        if criterion == "spanning":
            return float(_kernels.touches_both(ptr, verts, links.ok, comps.active,
                                               comps.parent, left, right))
        return _kernels.node_membership_largest(ptr, verts, links.ok, comps.active,
                                                comps.parent, topology.n_nodes)

    trials = range(config.trials)
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            return np.fromiter(pool.map(one, trials), dtype=float, count=config.trials)
    return np.fromiter((one(t) for t in trials), dtype=float, count=config.trials)


def _mean_se(values: np.ndarray):
    se = values.std(ddof=1) / math.sqrt(len(values)) if len(values) > 1 else 0.0
    return float(values.mean()), float(se)


def observe(topology: Topology, config: ProtocolConfig, criterion: str, workers: int = 1):
    """``(mean, stderr)`` of a criterion observable over ``config.trials`` cycles."""
    return _mean_se(_trial_values(topology, config, criterion, workers))


def giant_component_fraction(topology: Topology, config: ProtocolConfig, workers: int = 1):
    """Estimate ``F``: the expected fraction of nodes touching the largest component.

    A node touches a component when one of its successful links has an
    active end in it, which is exactly how a consumer at that node would be
    connected. For ``q = 1`` and ``n`` at least the maximum degree this is
    the plain bond-percolation giant-cluster fraction.
    """
    return observe(topology, config, "giant", workers)


def connection_probability(topology: Topology, config: ProtocolConfig, workers: int = 1):
    """Probability that the consumers share at least one GHZ state in a cycle."""
    return observe(topology, config, "consumer", workers)


def spanning_probability(topology: Topology, config: ProtocolConfig, workers: int = 1):
    return observe(topology, config, "spanning", workers)


def default_level(topology: Topology, criterion: str) -> float:
    return 0.5


GIANT_LEVELS = (0.2, 0.4)


def _bisect(fn, lo, hi, level, tol):
    """Locate ``fn(x) = level`` for increasing ``fn``; ``None`` if ``fn(hi) < level``."""
    if fn(hi)[0] < level:
        return None
    while hi - lo > 2 * tol:
        mid = 0.5 * (lo + hi)
        if fn(mid)[0] >= level:
            hi = mid
        else:
            lo = mid
    return lo, hi


def _memo(fn):
    cache = {}

    def wrapped(x):
        if x not in cache:
            cache[x] = fn(x)
        return cache[x]

    return wrapped


def _crossing(fn, lo, hi, level, tol, criterion, span=0.05):
    found = _bisect(fn, lo, hi, level, tol)
    if found is None:
        return None
    a, b = found
    x = 0.5 * (a + b)
    f_x = fn(x)
    xl, xh = max(lo, x - span), min(hi, x + span)
    slope = (fn(xh)[0] - fn(xl)[0]) / (xh - xl) if xh > xl else 0.0
    stat = f_x[1] / slope if slope > 0 else float("inf")
    width = 0.5 / slope if slope > 0 else float("inf")
    return CriticalPoint(x, 0.5 * (b - a) + stat, width > 0.05, criterion, f_x[0], f_x[1])


def _giant_onset(fn, lo, hi, tol, levels=GIANT_LEVELS):
    """Extrapolate the giant fraction to zero through two bisected level crossings.

    Above a mean-field threshold the giant fraction grows linearly, so the
    line through its crossings of two levels hits zero near the threshold.
    Level-crossing thresholds would instead drift with system size.
    """
    points = []
    for level in levels:
        found = _bisect(fn, lo, hi, level, tol)
        if found is None:
            return None
        a, b = found
        x = 0.5 * (a + b)
        points.append((x, fn(x), 0.5 * (b - a)))
    (x1, (f1, s1), h1), (x2, (f2, s2), h2) = points
    if x2 <= x1 or f2 <= f1:
        return CriticalPoint(x1, h1 + h2, True, "giant", f1, s1)
    slope = (f2 - f1) / (x2 - x1)
    onset = x1 - f1 / slope
    # bracket errors and level noise both move the line; propagate crudely
    err = max(h1, h2) * (1 + f1 / (f2 - f1)) + math.hypot(s1, s2) / slope * (1 + f1 / (f2 - f1))
    onset = min(max(onset, lo), hi)
    return CriticalPoint(onset, err, x1 - onset > 0.05, "giant", 0.0, 0.0)


def _threshold(fn, criterion, tol, level):
    fn = _memo(fn)
    if criterion == "giant":
        return _giant_onset(fn, 0.0, 1.0, tol)
    return _crossing(fn, 0.0, 1.0, level, tol, criterion)


def critical_q(topology, p: float, config: ProtocolConfig, tol: float = 0.005,
               criterion: str = "spanning", level: float | None = None,
               workers: int = 1) -> CriticalPoint | None:
    """Fusion-success threshold at link probability ``p``.

    Bisects ``q`` until the bracket is narrower than ``2 * tol``. For the
    crossing criteria the uncertainty adds the bracket half-width to the
    statistical half-width ``stderr / slope`` at the crossing; the
    ``giant`` criterion extrapolates two crossings instead (see
    :func:`_giant_onset`). Returns ``None`` when no crossing exists even at
    ``q = 1``.
    """
    if callable(topology):
        topology = topology()
    if level is None:
        level = default_level(topology, criterion)
    fn = lambda q: observe(topology, config.replace(p=p, q=q), criterion, workers)
    return _threshold(fn, criterion, tol, level)


def critical_p(topology, q: float, config: ProtocolConfig, tol: float = 0.005,
               criterion: str = "spanning", level: float | None = None,
               workers: int = 1) -> CriticalPoint | None:
    """Link-probability threshold at fusion success ``q``."""
    if callable(topology):
        topology = topology()
    if level is None:
        level = default_level(topology, criterion)
    fn = lambda p: observe(topology, config.replace(p=p, q=q), criterion, workers)
    return _threshold(fn, criterion, tol, level)


def site_bond_curve_sim(topology, config: ProtocolConfig, p_grid, tol: float = 0.005,
                        criterion: str = "spanning", level: float | None = None,
                        workers: int = 1) -> CriticalCurve:
    if callable(topology):
        topology = topology()
    p_grid = np.asarray(p_grid, dtype=float)
    q_c, err = [], []
    for p in p_grid:
        point = critical_q(topology, p, config, tol, criterion, level, workers)
        q_c.append(np.nan if point is None else point.value)
        err.append(np.nan if point is None else point.uncertainty)
    meta = {"source": "simulation", "variant": config.variant, "n": config.n,
            "criterion": criterion, "size": topology.n_nodes, "trials": config.trials}
    return CriticalCurve(p_grid, np.array(q_c), np.array(err), meta)


def is_pure_bond(topology: Topology, config: ProtocolConfig) -> bool:
    helper_deg = topology.degree[topology.roles == HELPER]
    max_deg = int(helper_deg.max()) if len(helper_deg) else 0
    return (config.variant != "brickwork" and config.q == 1.0 and config.p_star is None
            and config.n >= max_deg)


def newman_ziff_bond_sweep(topology: Topology, trials: int, seed: int, p_grid=None,
                           config: ProtocolConfig | None = None) -> SweepResult:
    """Newman-Ziff sweep for protocols that reduce to plain bond percolation.

    Each trial inserts the edges in a random order and records, after every
    insertion, the largest-cluster fraction and (when consumers exist) the
    number of shared GHZ states. The microcanonical curves are convolved
    with ``Binomial(E, p)`` weights to give canonical curves on ``p_grid``.
    """
    if config is not None and not is_pure_bond(topology, config):
        raise ValueError("protocol is not pure bond percolation; sample each (p, q) directly")
    if p_grid is None:
        p_grid = np.linspace(0, 1, 101)
    p_grid = np.asarray(p_grid, dtype=float)
    E, N = topology.n_edges, topology.n_nodes
    helper = topology.roles == HELPER
    vnode = topology.vertex_node
    element = np.where(helper[vnode], vnode, N + np.arange(topology.n_vertices))
    has_consumers = topology.consumer_a is not None and topology.consumer_b is not None
    if has_consumers:
        ca = element[topology.memory_vertices(topology.consumer_a)]
        cb = element[topology.memory_vertices(topology.consumer_b)]
    else:
        ca = cb = np.zeros(0, dtype=np.int64)

    largest = np.empty((trials, E + 1))
    connected = np.empty((trials, E + 1), dtype=np.bool_)
    shared = np.empty((trials, E + 1), dtype=np.int64)
    for t in range(trials):
        order = trial_rng(seed, t).permutation(E)
        _kernels.newman_ziff(topology.edges, order, element, N + topology.n_vertices, N,
                             ca, cb, largest[t], connected[t], shared[t])

    weights = stats.binom.pmf(np.arange(E + 1)[None, :], E, p_grid[:, None])
    values = {}
    observables = {"largest": largest}
    if has_consumers:
        observables.update(connection=connected.astype(float), rate=shared.astype(float))
    for name, micro in observables.items():
        canon = micro @ weights.T  # trials x len(p_grid)
        se = canon.std(axis=0, ddof=1) / math.sqrt(trials) if trials > 1 else np.zeros(len(p_grid))
        values[name] = (canon.mean(axis=0), se)
    return SweepResult(p_grid, values, trials, observables)
