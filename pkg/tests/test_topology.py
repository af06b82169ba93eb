import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ghznet.topology import (BLACK, CONSUMER_A, CONSUMER_B, HELPER, RED, DegreeDistribution,
                             Topology, TopologyError, apply_brickwork_coloring,
                             build_configuration_graph, build_square_grid, color_bounded_black,
                             default_partition, divide_network, dumps, load, loads, save)


def node_colors(topo, node):
    mask = (topo.edges == node).any(axis=1)
    return (topo.color[mask] == BLACK).sum(), (topo.color[mask] == RED).sum()


class TestSquareGrid:
    def test_smallest(self):
        g = build_square_grid(2, 2, (0, 0), (1, 1))
        assert (g.n_nodes, g.n_edges, g.n_vertices) == (4, 4, 8)
        assert (g.degree == 2).all()

    def test_three_by_three(self):
        g = build_square_grid(3, 3, (0, 1), (2, 1))
        assert g.degree[g.node_at(1, 1)] == 4
        assert all(g.degree[g.node_at(x, y)] == 2 for x in (0, 2) for y in (0, 2))
        assert g.distance == 2

    def test_corner_consumers(self):
        g = build_square_grid(100, 100, (1, 1), (98, 98))
        assert g.roles[g.node_at(1, 1)] == CONSUMER_A
        assert g.roles[g.node_at(98, 98)] == CONSUMER_B
        assert len(g.memory_vertices(g.consumer_a)) == 4
        assert len(g.memory_vertices(g.consumer_b)) == 4
        assert (g.roles == HELPER).sum() == 100 * 100 - 2
        assert g.distance == 194

    @pytest.mark.parametrize("a, b", [((0, 0), (0, 0)), ((-1, 0), (1, 1)), ((0, 0), (5, 1))])
    def test_bad_consumers(self, a, b):
        with pytest.raises(TopologyError):
            build_square_grid(3, 3, a, b)

    @given(st.integers(1, 12), st.integers(1, 12), st.data())
    @settings(max_examples=60, deadline=None)
    def test_memory_vertices_cover_incidences(self, w, h, data):
        if w * h < 2:
            return
        cells = [(x, y) for x in range(w) for y in range(h)]
        a, b = data.draw(st.lists(st.sampled_from(cells), min_size=2, max_size=2, unique=True))
        g = build_square_grid(w, h, a, b)
        ptr, verts = g.incidence
        assert sorted(verts.tolist()) == list(range(g.n_vertices))
        for node in range(g.n_nodes):
            for v in g.memory_vertices(node):
                assert g.edges[v >> 1, v & 1] == node
        interior = (g.coords[:, 0] > 0) & (g.coords[:, 0] < w - 1) & (g.coords[:, 1] > 0) & (g.coords[:, 1] < h - 1)
        assert (g.degree[interior] == 4).all()

    def test_deterministic(self):
        assert build_square_grid(7, 5, (1, 2), (5, 2)) == build_square_grid(7, 5, (1, 2), (5, 2))


class TestBrickwork:
    def test_two_by_two(self):
        g = apply_brickwork_coloring(build_square_grid(2, 2, (0, 0), (1, 1)))
        col = {tuple(e): c for e, c in zip(g.edges.tolist(), g.color)}
        assert col[(g.node_at(0, 0), g.node_at(0, 1))] == BLACK
        assert col[(g.node_at(1, 0), g.node_at(1, 1))] == RED

    def test_six_by_six_scan(self):
        g = apply_brickwork_coloring(build_square_grid(6, 6, (0, 0), (5, 5)))
        for node in range(g.n_nodes):
            black, red = node_colors(g, node)
            assert black <= 3 and red <= 1
            x, y = g.coords[node]
            if 0 < x < 5 and 0 < y < 5:
                assert (black, red) == (3, 1)

    def test_single_row(self):
        g = apply_brickwork_coloring(build_square_grid(6, 1, (0, 0), (5, 0)))
        assert (g.color == BLACK).all()

    def test_needs_grid(self):
        g = build_configuration_graph(DegreeDistribution.constant(3), 20, np.random.default_rng(0))
        with pytest.raises(TopologyError):
            apply_brickwork_coloring(g)


class TestConfigurationGraph:
    def test_constant_four(self):
        g = build_configuration_graph(DegreeDistribution.constant(4), 10_000, np.random.default_rng(0))
        assert g.degree.max() <= 4
        assert abs(g.degree.mean() - 4) < 0.05

    def test_poisson_mean(self):
        dist = DegreeDistribution.poisson(5, d_max=25)
        g = build_configuration_graph(dist, 10_000, np.random.default_rng(1))
        se = g.degree.std() / np.sqrt(g.n_nodes)
        # erasure removes O(1) edges, well inside the tolerance
        assert abs(g.degree.mean() - 5) < 3 * se

    def test_degree_two_is_cycles(self):
        import networkx as nx

        g = build_configuration_graph(DegreeDistribution.constant(2), 10, np.random.default_rng(3))
        graph = nx.Graph(g.edges.tolist())
        for comp in nx.connected_components(graph):
            sub = graph.subgraph(comp)
            assert all(d <= 2 for _, d in sub.degree())
            # erasure can only break cycles into paths
            assert sub.number_of_edges() in (len(comp), len(comp) - 1)

    def test_no_loops_or_multi_edges(self):
        g = build_configuration_graph(DegreeDistribution.poisson(3), 2000, np.random.default_rng(5))
        assert (g.edges[:, 0] != g.edges[:, 1]).all()
        assert len({tuple(sorted(e)) for e in g.edges.tolist()}) == g.n_edges

    def test_reproducible(self):
        dist = DegreeDistribution.poisson(4)
        a = build_configuration_graph(dist, 500, np.random.default_rng(9))
        b = build_configuration_graph(dist, 500, np.random.default_rng(9))
        assert a == b

    def test_degenerate(self):
        with pytest.raises(ValueError):
            DegreeDistribution(np.array([1.0]))

    def test_odd_stubs_unrepairable(self):
        # three odd degrees always sum to an odd stub count
        dist = DegreeDistribution(np.array([0, 0.5, 0, 0.5]))
        with pytest.raises(TopologyError):
            build_configuration_graph(dist, 3, np.random.default_rng(0))

    def test_odd_stubs_repaired(self):
        dist = DegreeDistribution(np.array([0, 0.5, 0.5]))
        for seed in range(20):
            g = build_configuration_graph(dist, 5, np.random.default_rng(seed))
            assert g.degree.max() <= 2

    @pytest.mark.parametrize("probs", [[0.5, 0.6], [-0.1, 1.1], []])
    def test_bad_distribution(self, probs):
        with pytest.raises(ValueError):
            DegreeDistribution(np.array(probs))


class TestBoundedBlack:
    def test_caps_never_bind(self):
        g = build_configuration_graph(DegreeDistribution.constant(3), 200, np.random.default_rng(0))
        assert (color_bounded_black(g, 3, np.random.default_rng(1)).color == BLACK).all()

    def test_star(self):
        edges = np.array([[0, i] for i in range(1, 7)])
        star = Topology(np.zeros(7, dtype=np.int8), edges, np.zeros(6, dtype=np.int8),
                        np.full(6, -1, dtype=np.int8))
        c = color_bounded_black(star, 3, np.random.default_rng(2))
        assert node_colors(c, 0) == (3, 3)

    @given(st.integers(0, 2**32 - 1), st.integers(1, 4))
    @settings(max_examples=30, deadline=None)
    def test_cap_holds(self, seed, n):
        rng = np.random.default_rng(seed)
        g = build_configuration_graph(DegreeDistribution.constant(4), 100, rng)
        c = color_bounded_black(g, n, rng)
        black = np.bincount(c.edges[c.color == BLACK].ravel(), minlength=c.n_nodes)
        assert black.max() <= n
        # a red edge always has a saturated endpoint
        for u, v in c.edges[c.color == RED]:
            assert black[u] == n or black[v] == n

    def test_bad_cap(self):
        g = build_square_grid(3, 3, (0, 0), (2, 2))
        with pytest.raises(ValueError):
            color_bounded_black(g, 0, np.random.default_rng(0))


class TestDivide:
    def test_default_strips(self):
        g = build_square_grid(100, 100, (25, 49), (75, 49))
        part = default_partition(g)
        ys = g.coords[:, 1]
        corridor = np.zeros(g.n_nodes, dtype=bool)
        for x in (25, 75):
            corridor |= (g.coords[:, 0] == x) & (ys >= 25) & (ys < 49)
        for x in (24, 76):
            corridor |= (g.coords[:, 0] == x) & (ys >= 49) & (ys < 75)
        plain = (g.roles == HELPER) & ~corridor
        assert (part[plain] == ys[plain] // 25).all()

    def test_divided_is_valid(self):
        g = build_square_grid(100, 100, (25, 49), (75, 49))
        d = divide_network(g)
        assert (d.partition >= 0).all()
        assert (d.partition[d.roles[d.edges[:, 0]] == HELPER] == 0).any()
        for node in (d.consumer_a, d.consumer_b):
            labels = d.partition[(d.edges == node).any(axis=1)]
            assert sorted(labels.tolist()) == [0, 1, 2, 3]
        # no edge joins helpers of different partitions
        part = np.full(d.n_nodes, -1)
        for (u, v), p in zip(d.edges, d.partition):
            for node in (u, v):
                if d.roles[node] == HELPER:
                    assert part[node] in (-1, p)
                    part[node] = p

    def test_explicit_map_rejected(self):
        g = build_square_grid(5, 5, (1, 2), (3, 2))
        with pytest.raises(TopologyError, match="exactly one memory"):
            divide_network(g, np.zeros(g.n_nodes, dtype=int))

    def test_default_needs_same_row(self):
        g = build_square_grid(8, 8, (1, 2), (5, 4))
        with pytest.raises(TopologyError):
            divide_network(g)


class TestSerialization:
    @pytest.mark.parametrize("make", [
        lambda: build_square_grid(4, 3, (0, 1), (3, 1)),
        lambda: apply_brickwork_coloring(build_square_grid(5, 5, (0, 0), (4, 4))),
        lambda: divide_network(build_square_grid(8, 8, (2, 3), (5, 3))),
        lambda: color_bounded_black(
            build_configuration_graph(DegreeDistribution.poisson(3), 60, np.random.default_rng(4), (0, 1)),
            2, np.random.default_rng(5)),
    ])
    def test_round_trip(self, make, tmp_path):
        topo = make()
        assert loads(dumps(topo)) == topo
        save(topo, tmp_path / "t.txt")
        assert load(tmp_path / "t.txt") == topo

    def test_format(self):
        text = dumps(build_square_grid(2, 1, (0, 0), (1, 0)))
        assert text.splitlines() == [
            "ghznet-topology 1",
            "kind grid width 2 height 1 nodes 2 edges 1",
            "n 0 consumer-A 0 0",
            "n 1 consumer-B 1 0",
            "e 0 1 uncolored none",
        ]

    def test_rejects_garbage(self):
        with pytest.raises(TopologyError):
            loads("hello\n")

    def test_edge_bounds(self):
        with pytest.raises(TopologyError):
            Topology(np.zeros(2, dtype=np.int8), np.array([[0, 5]]), np.zeros(1, dtype=np.int8),
                     np.full(1, -1, dtype=np.int8))


def test_with_consumers():
    g = build_configuration_graph(DegreeDistribution.constant(3), 30, np.random.default_rng(0))
    g2 = g.with_consumers(3, 7)
    assert (g2.consumer_a, g2.consumer_b) == (3, 7)
    assert g2.roles[3] == CONSUMER_A and g2.roles[7] == CONSUMER_B
    with pytest.raises(TopologyError):
        g.with_consumers(2, 2)
