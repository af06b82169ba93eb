"""Brute-force references for small instances.

These deliberately share no code with the simulator's union-find path:
the enumeration builds the post-fusion graph with networkx, and the
state-vector routines apply GHZ projections and X measurements to explicit
amplitudes.
"""
from __future__ import annotations

import itertools
from math import comb

import networkx as nx
import numpy as np

from .topology import CONSUMER_A, CONSUMER_B, HELPER, Topology


def _incident(topology: Topology):
    inc = {v: [] for v in range(topology.n_nodes)}
    for e, (u, v) in enumerate(topology.edges.tolist()):
        inc[u].append((e, 0))
        inc[v].append((e, 1))
    return inc


def _choices(qubits, n):
    """Uniform fusion-set choices ``(fused, measured, probability)`` for one helper."""
    s = len(qubits)
    if s <= 1:
        return [((), tuple(qubits), 1.0)]
    if s <= n:
        return [(tuple(qubits), (), 1.0)]
    if n == 1:
        return [((), tuple(qubits), 1.0)]
    out = []
    for subset in itertools.combinations(qubits, n):
        rest = tuple(x for x in qubits if x not in subset)
        out.append((subset, rest, 1.0 / comb(s, n)))
    return out


def _shared_count(topology, inc, link_up, fusions, success):
    g = nx.Graph()
    active = set()
    for node, role in enumerate(topology.roles):
        if role != HELPER:
            active.update(inc[node])
    for (node, fused), ok in zip(fusions, success):
        if ok:
            active.update(fused)
            for a, b in itertools.combinations(fused, 2):
                g.add_edge(a, b)
    g.add_nodes_from(active)
    for e, up in enumerate(link_up):
        if up and (e, 0) in active and (e, 1) in active:
            g.add_edge((e, 0), (e, 1))
    a_mem = set(inc[topology.consumer(CONSUMER_A)])
    b_mem = set(inc[topology.consumer(CONSUMER_B)])
    return sum(1 for comp in nx.connected_components(g) if comp & a_mem and comp & b_mem)


def exact_expected_shared(topology: Topology, n: int, p: float, q: float) -> float:
    """Expected shared-GHZ count of the random ``n``-GHZ rule by exhaustive enumeration.

    Sums over every link pattern, every fusion-set choice at helpers with
    more than ``n`` successful links, and every fusion outcome.
    """
    inc = _incident(topology)
    E = topology.n_edges
    helpers = [v for v in range(topology.n_nodes) if topology.roles[v] == HELPER]
    total = 0.0
    for pattern in itertools.product((0, 1), repeat=E):
        k = sum(pattern)
        w_links = p**k * (1 - p) ** (E - k)
        if w_links == 0.0:
            continue
        per_node = []
        for node in helpers:
            qubits = [(e, s) for e, s in inc[node] if pattern[e]]
            per_node.append([(node, fused, prob) for fused, _, prob in _choices(qubits, n)])
        for plan in itertools.product(*per_node):
            w_plan = w_links
            fusions = []
            for node, fused, prob in plan:
                w_plan *= prob
                if len(fused) >= 2:
                    fusions.append((node, fused))
            for outcome in itertools.product((True, False), repeat=len(fusions)):
                good = sum(outcome)
                w = w_plan * q**good * (1 - q) ** (len(fusions) - good)
                if w == 0.0:
                    continue
                total += w * _shared_count(topology, inc, pattern, fusions, outcome)
    return total


# --- state vectors ---------------------------------------------------------

class StateVector:
    """Pure state of labelled qubits stored as a ``(2,)*N`` tensor."""

    def __init__(self, labels, tensor):
        self.labels = list(labels)
        self.tensor = tensor

    @classmethod
    def ghz_product(cls, records):
        """Tensor product of ``(|0..0> + |1..1>)/sqrt(2)`` over each record."""
        labels, tensor = [], np.ones((), dtype=complex)
        for rec in records:
            qubits = sorted(rec)
            m = len(qubits)
            ghz = np.zeros((2,) * m, dtype=complex)
            ghz[(0,) * m] = ghz[(1,) * m] = 1 / np.sqrt(2)
            if m == 1:
                ghz = np.array([1, 1], dtype=complex) / np.sqrt(2)
            tensor = np.multiply.outer(tensor, ghz)
            labels.extend(qubits)
        return cls(labels, tensor)

    def _axes(self, qubits):
        return [self.labels.index(x) for x in qubits]

    def _contract(self, qubits, bra):
        """Project ``qubits`` onto the normalised state ``bra`` and drop them."""
        axes = self._axes(qubits)
        rest = np.tensordot(bra.conj(), self.tensor, axes=(list(range(len(qubits))), axes))
        labels = [x for x in self.labels if x not in qubits]
        return labels, rest

    def measure(self, qubits, basis, rng):
        """Projective measurement on ``qubits``; returns the outcome index."""
        probs, branches = [], []
        for bra in basis:
            labels, rest = self._contract(qubits, bra)
            probs.append(float(np.vdot(rest, rest).real))
            branches.append((labels, rest))
        probs = np.array(probs)
        k = int(rng.choice(len(basis), p=probs / probs.sum()))
        labels, rest = branches[k]
        self.labels, self.tensor = labels, rest / np.sqrt(probs[k])
        return k

    def measure_x(self, qubit, rng):
        plus = np.array([1, 1], dtype=complex) / np.sqrt(2)
        minus = np.array([1, -1], dtype=complex) / np.sqrt(2)
        return self.measure([qubit], [plus, minus], rng)

    def fuse(self, qubits, rng):
        return self.measure(qubits, ghz_basis(len(qubits)), rng)

    def expectation(self, ops):
        """``<prod_i P_i>`` for a dict ``{label: 'X' | 'Z'}``."""
        paulis = {"X": np.array([[0, 1], [1, 0]], dtype=complex),
                  "Z": np.array([[1, 0], [0, -1]], dtype=complex)}
        t = self.tensor
        for label, name in ops.items():
            ax = self.labels.index(label)
            t = np.moveaxis(np.tensordot(paulis[name], t, axes=([1], [ax])), 0, ax)
        return complex(np.vdot(self.tensor, t))

    def reduced_purity(self, qubits):
        axes = self._axes(qubits)
        other = [i for i in range(len(self.labels)) if i not in axes]
        mat = np.moveaxis(self.tensor, axes + other, range(len(self.labels)))
        mat = mat.reshape(2 ** len(axes), -1)
        rho = mat @ mat.conj().T
        return float(np.trace(rho @ rho).real)


def ghz_basis(k: int):
    """The ``2**k`` states ``(|x> +- |~x>)/sqrt(2)`` with ``x`` starting at 0."""
    basis = []
    for bits in itertools.product((0, 1), repeat=k - 1):
        x = (0,) + bits
        xbar = tuple(1 - b for b in x)
        for sign in (1, -1):
            v = np.zeros((2,) * k, dtype=complex)
            v[x] = 1 / np.sqrt(2)
            v[xbar] = sign / np.sqrt(2)
            basis.append(v)
    return basis


def ghz_groups(state: StateVector, atol: float = 1e-9):
    """Split the remaining qubits into GHZ factors and check each one.

    Qubits ``i, j`` share a factor when ``|<Z_i Z_j>| = 1``. Each factor
    must be pure and, with two or more qubits, satisfy ``|<X...X>| = 1``.
    Raises ``AssertionError`` when the state is not a product of GHZ states.
    """
    labels = list(state.labels)
    g = nx.Graph()
    g.add_nodes_from(labels)
    for a, b in itertools.combinations(labels, 2):
        if abs(abs(state.expectation({a: "Z", b: "Z"})) - 1) < atol:
            g.add_edge(a, b)
    groups = [frozenset(c) for c in nx.connected_components(g)]
    for grp in groups:
        assert abs(state.reduced_purity(sorted(grp)) - 1) < 1e-7, f"{set(grp)} is not a pure factor"
        if len(grp) >= 2:
            xs = abs(state.expectation({x: "X" for x in grp}))
            assert abs(xs - 1) < atol, f"{set(grp)} is not GHZ-like (|<X..X>| = {xs})"
    return sorted(groups, key=lambda s: sorted(map(str, s)))


def ghz_x_distribution(n_qubits: int) -> np.ndarray:
    """Exact joint X-basis outcome distribution of an ``n``-qubit GHZ state."""
    h = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
    amp = np.zeros(2**n_qubits)
    amp[0] = amp[-1] = 1 / np.sqrt(2)
    t = amp.reshape((2,) * n_qubits)
    for ax in range(n_qubits):
        t = np.moveaxis(np.tensordot(h, t, axes=([1], [ax])), 0, ax)
    return (np.abs(t) ** 2).reshape(-1)
