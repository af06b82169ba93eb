import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from ghznet.analytics import (analytic_curve, analytic_q_c, brickwork_q_c, brickwork_s_matrix,
                              criticality_sum, excess_distribution, h1_at_one, link_binomial,
                              mean_component_size, thinned_curve)
from ghznet.percolation import CriticalCurve
from ghznet.topology import DegreeDistribution, build_configuration_graph


def ctx_of(dist):
    return excess_distribution(dist)


def test_excess_constant():
    ctx = ctx_of(DegreeDistribution.constant(4))
    assert ctx.excess.tolist() == [0, 0, 0, 1]
    assert ctx.z == 4


def test_excess_poisson_is_poisson():
    # the excess of a Poisson law is the same Poisson law
    ctx = ctx_of(DegreeDistribution.poisson(3.0, d_max=60))
    from scipy import stats
    np.testing.assert_allclose(ctx.excess[:30], stats.poisson.pmf(np.arange(30), 3.0), atol=1e-12)


def test_link_binomial():
    assert link_binomial(0, 0, 0.3) == 1
    assert link_binomial(2, 4, 0.5) == pytest.approx(6 / 16)
    assert sum(link_binomial(l, 7, 0.2) for l in range(8)) == pytest.approx(1)
    with pytest.raises(ValueError):
        link_binomial(3, 2, 0.5)


@pytest.mark.parametrize("p", [0.0, 0.25, 0.6, 1.0])
def test_classic_limit(p):
    ctx = ctx_of(DegreeDistribution.constant(4))
    for n in (4, 5, 9):
        assert criticality_sum(ctx, n, p) == pytest.approx(3 * p)


def test_classic_threshold():
    ctx = ctx_of(DegreeDistribution.constant(4))
    assert analytic_q_c(ctx, 4, 1.0) == pytest.approx(1 / 3)
    assert analytic_q_c(ctx, 4, 0.5) == pytest.approx(2 / 3)
    assert analytic_q_c(ctx, 4, 0.3) is None


def b_interchanged(excess, n, p):
    """Sum over links first, then over excess degree."""
    total = 0.0
    kmax = len(excess) - 1
    for l in range(kmax + 1):
        weight = l if l < n else n * (n - 1) / (l + 1)
        inner = sum(excess[k] * math.comb(k, l) * p**l * (1 - p) ** (k - l) for k in range(l, kmax + 1))
        total += weight * inner
    return total


@pytest.mark.parametrize("n, p", [(3, 0.5), (2, 0.9), (5, 0.2), (1, 0.7)])
def test_sum_order_oracle(n, p):
    ctx = ctx_of(DegreeDistribution.poisson(5, d_max=40))
    assert criticality_sum(ctx, n, p) == pytest.approx(b_interchanged(ctx.excess, n, p), abs=1e-10)


@given(st.floats(0.5, 8), st.integers(1, 6), st.floats(0, 1), st.floats(0, 1))
@settings(max_examples=80, deadline=None)
def test_h1_normalised(lam, n, p, q):
    ctx = ctx_of(DegreeDistribution.poisson(lam))
    assert h1_at_one(ctx, n, p, q) == pytest.approx(1.0, abs=1e-9)


def test_mean_size_limits():
    ctx = ctx_of(DegreeDistribution.poisson(4))
    assert mean_component_size(ctx, 3, 0.5, 0.0) == 0.0
    assert mean_component_size(ctx, 3, 0.0, 0.7) == pytest.approx(0.7)
    with pytest.raises(ValueError, match="subcritical"):
        mean_component_size(ctx, 3, 1.0, 0.9)


def test_mean_size_matches_site_percolation():
    # with n >= d_max and p = 1 the rule is site percolation with occupation q
    rng = np.random.default_rng(11)
    g = build_configuration_graph(DegreeDistribution.constant(3), 100_000, rng)
    q = 0.3
    sizes = []
    for _ in range(5):
        occ = rng.random(g.n_nodes) < q
        keep = occ[g.edges[:, 0]] & occ[g.edges[:, 1]]
        u, v = g.edges[keep].T
        adj = coo_matrix((np.ones(len(u)), (u, v)), shape=(g.n_nodes, g.n_nodes))
        _, labels = connected_components(adj, directed=False)
        counts = np.bincount(labels[occ])
        sizes.append((counts.astype(float) ** 2).sum() / g.n_nodes)
    ctx = ctx_of(DegreeDistribution.constant(3))
    expected = mean_component_size(ctx, 3, 1.0, q)
    assert expected == pytest.approx(0.975)
    assert np.mean(sizes) == pytest.approx(expected, rel=0.05)


def test_brickwork_zero_links():
    s = brickwork_s_matrix(ctx_of(DegreeDistribution.poisson(6)), 3, 0.0)
    assert s.S11 == s.S12 == s.S21 == s.S22 == 0
    assert brickwork_q_c(ctx_of(DegreeDistribution.poisson(6)), 3, 0.0) is None


@pytest.mark.parametrize("p", [0.4, 0.7, 1.0])
def test_brickwork_reduces_when_degrees_fit(p):
    ctx = ctx_of(DegreeDistribution.constant(3))
    assert brickwork_q_c(ctx, 3, p) == pytest.approx(analytic_q_c(ctx, 3, p))


def s_triple_sum(excess, n, p):
    b = lambda l, k: math.comb(k, l) * p**l * (1 - p) ** (k - l)
    s = np.zeros((2, 2))
    for k, ek in enumerate(excess):
        if k < n:
            s[0, 0] += ek * sum(l * b(l, k) for l in range(k + 1))
            continue
        for l1 in range(n):
            for l2 in range(k - n + 2):
                w = ek * b(l1, n - 1) * b(l2, k - n + 1)
                s[0, 0] += w * l1
                s[0, 1] += w * min(l2, n - 1 - l1)
        for l1 in range(n):
            for l2 in range(k - n + 1):
                w = ek * b(l1, n) * b(l2, k - n)
                slots = n - 1 - l1
                share = 1.0 if l2 <= slots else (slots + 1) / (l2 + 1)
                s[1, 0] += w * share * l1
                s[1, 1] += w * share * min(l2, slots)
    return s


def test_brickwork_triple_sum():
    ctx = ctx_of(DegreeDistribution.poisson(50))
    got = brickwork_s_matrix(ctx, 10, 0.3).matrix
    np.testing.assert_allclose(got, s_triple_sum(ctx.excess, 10, 0.3), rtol=1e-9, atol=1e-12)


@pytest.mark.parametrize("lam, n, p", [(4, 3, 0.8), (6, 3, 0.6), (10, 4, 1.0)])
def test_brickwork_root(lam, n, p):
    ctx = ctx_of(DegreeDistribution.poisson(lam))
    q = brickwork_q_c(ctx, n, p)
    S = brickwork_s_matrix(ctx, n, p).matrix
    assert np.linalg.det(np.eye(2) - q * S) == pytest.approx(0, abs=1e-9)
    # the spectral radius of q S reaches one exactly at the root
    assert np.abs(np.linalg.eigvals(q * S)).max() == pytest.approx(1.0)


def test_brickwork_beats_random_for_dense_graphs():
    ctx = ctx_of(DegreeDistribution.poisson(8))
    # random choices lose the giant cluster, the deterministic rule keeps it
    assert analytic_q_c(ctx, 3, 1.0) is None
    assert brickwork_q_c(ctx, 3, 1.0) is not None


def test_analytic_curve_marks_missing():
    ctx = ctx_of(DegreeDistribution.constant(4))
    c = analytic_curve(ctx, 4, [0.2, 0.5, 1.0])
    assert np.isnan(c.q_c[0]) and np.isnan(c.uncertainty[0])
    assert c.q_c[2] == pytest.approx(1 / 3)
    assert c.meta["source"] == "analytic"


def test_thinned_curve():
    c = CriticalCurve([0.3, 0.5, 0.7, 0.9], [np.nan, 0.6, 0.5, 0.8], [np.nan, 0.01, 0.02, 0.03])
    t = thinned_curve(c)
    assert np.isnan(t.q_c[0])
    assert t.q_c[1:].tolist() == [0.6, 0.5, 0.5]
    assert t.uncertainty[3] == 0.02
    assert t.meta["thinned"]


def test_thinned_curve_all_missing():
    c = CriticalCurve([0.1, 0.2], [np.nan, np.nan], [np.nan, np.nan])
    assert np.isnan(thinned_curve(c).q_c).all()
