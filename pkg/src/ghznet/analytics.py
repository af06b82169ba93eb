"""Generating-function thresholds for configuration-model networks.

For a node reached along a random link, ``H1`` is the generating function
of the cluster size behind it. Differentiating its self-consistency
relation at ``x = 1`` gives ``H1'(1) = q*A + q*B*H1'(1)``, so the mean
cluster size diverges at ``q * B(p) = 1``. The brickwork-like rule tracks
black and red links separately and leads to a 2x2 linear system instead.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .percolation import CriticalCurve
from .topology import DegreeDistribution


@dataclass(frozen=True)
class GenFnContext:
    dist: DegreeDistribution
    excess: np.ndarray

    @property
    def z(self) -> float:
        return self.dist.mean

    @property
    def d_max(self) -> int:
        return self.dist.d_max


def excess_distribution(dist: DegreeDistribution) -> GenFnContext:
    """Excess-degree distribution ``e_d = (d + 1) p_{d+1} / z``."""
    z = dist.mean
    if z <= 0:
        raise ValueError("zero mean degree")
    d = np.arange(1, len(dist.probs))
    excess = d * dist.probs[1:] / z
    if len(excess) == 0:
        excess = np.zeros(1)
    excess = excess / excess.sum()
    excess.setflags(write=False)
    return GenFnContext(dist, excess)


def link_binomial(l: int, k: int, p: float) -> float:
    """Probability that ``l`` of ``k`` edges carry a link."""
    if not 0 <= l <= k:
        raise ValueError(f"need 0 <= l <= k, got l={l}, k={k}")
    return math.comb(k, l) * p**l * (1 - p) ** (k - l)


def _pmf_table(kmax: int, p: float) -> np.ndarray:
    """``T[k, l] = P(l | k)`` for ``0 <= l <= k <= kmax``; zero above the diagonal."""
    k = np.arange(kmax + 1)[:, None]
    l = np.arange(kmax + 1)[None, :]
    return np.where(l <= k, stats.binom.pmf(l, k, p), 0.0)


def _branch_weights(ctx: GenFnContext, n: int, p: float):
    """Constant (``A``) and linear (``B``) coefficients of ``H1'(1)``."""
    kmax = len(ctx.excess) - 1
    table = _pmf_table(kmax, p)
    k = np.arange(kmax + 1)[:, None]
    l = np.arange(kmax + 1)[None, :]
    capped = (k >= n) & (l >= n)
    const = np.where(capped, n / (l + 1), 1.0)
    linear = np.where(capped, n * (n - 1) / (l + 1), l)
    A = float(ctx.excess @ (table * const).sum(axis=1))
    B = float(ctx.excess @ (table * linear).sum(axis=1))
    return A, B


def criticality_sum(ctx: GenFnContext, n: int, p: float) -> float:
    """``B(p)``: expected number of onward links glued to a link's far end."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return _branch_weights(ctx, n, p)[1]


def analytic_q_c(ctx: GenFnContext, n: int, p: float) -> float | None:
    """Fusion-success threshold ``1 / B(p)``; ``None`` when ``B(p) < 1``."""
    b = criticality_sum(ctx, n, p)
    if b < 1.0:
        return None
    return 1.0 / b


def h1_at_one(ctx: GenFnContext, n: int, p: float, q: float) -> float:
    """``H1(1)``: total probability of the link self-consistency relation."""
    A, _ = _branch_weights(ctx, n, p)
    kmax = len(ctx.excess) - 1
    table = _pmf_table(kmax, p)
    k = np.arange(kmax + 1)[:, None]
    l = np.arange(kmax + 1)[None, :]
    excluded = np.where((k >= n) & (l >= n), (l + 1 - n) / (l + 1), 0.0)
    return 1 - q + q * A + q * float(ctx.excess @ (table * excluded).sum(axis=1))


def mean_component_size(ctx: GenFnContext, n: int, p: float, q: float) -> float:
    """Mean size of the cluster containing a random node below threshold."""
    A, B = _branch_weights(ctx, n, p)
    if q * B >= 1.0:
        raise ValueError(f"(p={p}, q={q}) is not subcritical: q*B = {q * B:.6g} >= 1")
    h1 = q * A / (1 - q * B)
    return q * (1 + ctx.z * p * h1)


@dataclass(frozen=True)
class BrickworkSystem:
    """``H' = q S H' + C`` for black (1) and red (2) link clusters."""

    S11: float
    S12: float
    S21: float
    S22: float
    C1: float
    C2: float

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.S11, self.S12], [self.S21, self.S22]])


def brickwork_s_matrix(ctx: GenFnContext, n: int, p: float, q: float = 1.0) -> BrickworkSystem:
    """Coefficients of the black/red cluster-size system.

    Arriving along a black link at a node with ``k`` excess edges: for
    ``k < n`` every edge is black and all links fuse. Otherwise the node
    has ``n - 1`` excess black and ``k - n + 1`` red edges, and red links
    fill the fusion only up to ``n``. Arriving along a red link the node
    has ``n`` black and ``k - n`` excess red edges, and the arrival link is
    chosen among the red links competing for the free slots.
    """
    s11 = s12 = s21 = s22 = c1 = c2 = 0.0
    binom = stats.binom.pmf
    for k, ek in enumerate(ctx.excess):
        if ek == 0.0:
            continue
        if k < n:
            l = np.arange(k + 1)
            w = binom(l, k, p)
            s11 += ek * float(w @ l)
            c1 += ek * float(w.sum())
            continue
        # black arrival: n - 1 excess black, k - n + 1 red
        l1 = np.arange(n)[:, None]
        l2 = np.arange(k - n + 2)[None, :]
        w = binom(l1, n - 1, p) * binom(l2, k - n + 1, p)
        fits = l2 <= n - 1 - l1
        red_used = np.where(fits, l2, n - 1 - l1)
        s11 += ek * float((w * l1).sum())
        s12 += ek * float((w * red_used).sum())
        c1 += ek * float(w.sum())
        # red arrival: n black, k - n excess red; l1 = n leaves no room
        l1 = np.arange(n)[:, None]
        l2 = np.arange(k - n + 1)[None, :]
        w = binom(l1, n, p) * binom(l2, k - n, p)
        fits = l2 <= n - 1 - l1
        chosen = np.where(fits, 1.0, (n - l1) / (l2 + 1))
        red_used = np.where(fits, l2, n - 1 - l1)
        s21 += ek * float((w * chosen * l1).sum())
        s22 += ek * float((w * chosen * red_used).sum())
        c2 += ek * float((w * chosen).sum())
    return BrickworkSystem(s11, s12, s21, s22, q * c1, q * c2)


def brickwork_q_c(ctx: GenFnContext, n: int, p: float) -> float | None:
    """Smallest ``q`` in (0, 1] with ``(1 - q S11)(1 - q S22) = q^2 S12 S21``."""
    s = brickwork_s_matrix(ctx, n, p)
    trace = s.S11 + s.S22
    d = s.S12 * s.S21 - s.S11 * s.S22
    if abs(d) < 1e-14:
        if trace <= 0:
            return None
        q = 1.0 / trace
    else:
        disc = trace * trace + 4 * d
        if disc < 0 or trace + math.sqrt(disc) <= 0:
            return None
        # rationalised form of (-T + sqrt(T^2 + 4D)) / (2D)
        q = 2.0 / (trace + math.sqrt(disc))
    return q if 0.0 < q <= 1.0 else None


def analytic_curve(ctx: GenFnContext, n: int, p_grid, brickwork: bool = False) -> CriticalCurve:
    solve = brickwork_q_c if brickwork else analytic_q_c
    p_grid = np.asarray(p_grid, dtype=float)
    q_c = np.array([np.nan if (v := solve(ctx, n, p)) is None else v for p in p_grid])
    return CriticalCurve(
        p_grid, q_c, np.where(np.isnan(q_c), np.nan, 0.0),
        {"source": "analytic", "variant": "brickwork" if brickwork else "nGHZ-random",
         "n": n, "criterion": "mean-size divergence", "size": "inf"},
    )


def thinned_curve(curve: CriticalCurve) -> CriticalCurve:
    """Threshold curve when links beyond the best ``p`` are thinned away.

    ``q'_c(p) = min_{p' <= p} q_c(p')``; missing thresholds count as +inf.
    """
    q = np.where(np.isnan(curve.q_c), np.inf, curve.q_c)
    running = np.minimum.accumulate(q)
    idx = np.zeros(len(q), dtype=int)
    for i in range(1, len(q)):
        idx[i] = i if q[i] <= running[i - 1] else idx[i - 1]
    out_q = np.where(np.isinf(running), np.nan, running)
    out_err = np.where(np.isinf(running), np.nan, curve.uncertainty[idx])
    meta = dict(curve.meta, thinned=True)
    return CriticalCurve(curve.p.copy(), out_q, out_err, meta)
