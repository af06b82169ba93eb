"""Network graphs for the repeater protocols.

A :class:`Topology` is an immutable bundle of numpy arrays. Nodes are
repeaters, edges are the links between them, and every (node, edge)
incidence carries one memory qubit. Memory vertex ``2*e`` sits at
``edges[e, 0]`` and ``2*e + 1`` at ``edges[e, 1]``, so the partner of a
vertex across its link is ``v ^ 1``.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

HELPER, CONSUMER_A, CONSUMER_B = 0, 1, 2
UNCOLORED, BLACK, RED = 0, 1, 2
NO_PARTITION = -1

ROLE_NAMES = {HELPER: "helper", CONSUMER_A: "consumer-A", CONSUMER_B: "consumer-B"}
COLOR_NAMES = {UNCOLORED: "uncolored", BLACK: "black", RED: "red"}


class TopologyError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Topology:
    """Repeater graph with consumer designation and optional edge labels."""

    roles: np.ndarray
    edges: np.ndarray
    color: np.ndarray
    partition: np.ndarray
    coords: np.ndarray | None = None
    kind: str = "graph"
    width: int | None = None
    height: int | None = None

    def __post_init__(self):
        for name in ("roles", "edges", "color", "partition", "coords"):
            arr = getattr(self, name)
            if arr is not None:
                arr.setflags(write=False)
        if self.edges.size and (self.edges.min() < 0 or self.edges.max() >= self.n_nodes):
            raise TopologyError("edge endpoint references a missing node")

    @property
    def n_nodes(self) -> int:
        return len(self.roles)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def n_vertices(self) -> int:
        return 2 * len(self.edges)

    @property
    def is_grid(self) -> bool:
        return self.kind == "grid"

    @cached_property
    def vertex_node(self) -> np.ndarray:
        """Owning node of each memory vertex."""
        return self.edges.reshape(-1).astype(np.int64)

    @cached_property
    def degree(self) -> np.ndarray:
        return np.bincount(self.vertex_node, minlength=self.n_nodes)

    @cached_property
    def incidence(self) -> tuple[np.ndarray, np.ndarray]:
        """CSR view ``(ptr, vertices)`` of the memory vertices held by each node."""
        order = np.argsort(self.vertex_node, kind="stable")
        ptr = np.zeros(self.n_nodes + 1, dtype=np.int64)
        np.cumsum(self.degree, out=ptr[1:])
        return ptr, order.astype(np.int64)

    def consumer(self, role: int) -> int | None:
        idx = np.flatnonzero(self.roles == role)
        return int(idx[0]) if len(idx) else None

    @cached_property
    def consumer_a(self) -> int | None:
        return self.consumer(CONSUMER_A)

    @cached_property
    def consumer_b(self) -> int | None:
        return self.consumer(CONSUMER_B)

    def memory_vertices(self, node: int) -> np.ndarray:
        ptr, verts = self.incidence
        return verts[ptr[node]:ptr[node + 1]]

    @property
    def distance(self) -> int | None:
        """Manhattan distance between the consumers (grid coordinates only)."""
        a, b = self.consumer_a, self.consumer_b
        if self.coords is None or a is None or b is None:
            return None
        return int(np.abs(self.coords[a] - self.coords[b]).sum())

    def node_at(self, x: int, y: int) -> int:
        if not self.is_grid:
            raise TopologyError("grid coordinates on a non-grid topology")
        if not (0 <= x < self.width and 0 <= y < self.height):
            raise TopologyError(f"coordinate {(x, y)} outside {self.width}x{self.height} grid")
        return y * self.width + x

    def replace(self, **changes) -> "Topology":
        return dataclasses.replace(self, **changes)

    def with_consumers(self, a: int, b: int) -> "Topology":
        if a == b:
            raise TopologyError("consumers must be distinct nodes")
        for node in (a, b):
            if not 0 <= node < self.n_nodes:
                raise TopologyError(f"consumer node {node} does not exist")
        roles = np.zeros(self.n_nodes, dtype=np.int8)
        roles[a] = CONSUMER_A
        roles[b] = CONSUMER_B
        return self.replace(roles=roles)

    def to_text(self) -> str:
        return dumps(self)

    def __eq__(self, other):
        if not isinstance(other, Topology):
            return NotImplemented
        same_coords = (self.coords is None and other.coords is None) or (
            self.coords is not None and other.coords is not None
            and np.array_equal(self.coords, other.coords)
        )
        return (
            self.kind == other.kind and self.width == other.width and self.height == other.height
            and same_coords
            and np.array_equal(self.roles, other.roles)
            and np.array_equal(self.edges, other.edges)
            and np.array_equal(self.color, other.color)
            and np.array_equal(self.partition, other.partition)
        )

    __hash__ = None


def _make(edges, roles, **kw) -> Topology:
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    return Topology(
        roles=np.asarray(roles, dtype=np.int8),
        edges=edges,
        color=kw.pop("color", np.zeros(len(edges), dtype=np.int8)),
        partition=kw.pop("partition", np.full(len(edges), NO_PARTITION, dtype=np.int8)),
        **kw,
    )


def build_square_grid(width: int, height: int, consumer_a, consumer_b) -> Topology:
    """Open-boundary ``width x height`` grid with consumers at the given ``(x, y)``.

    Node ``(x, y)`` has id ``y * width + x``.
    """
    if width < 1 or height < 1:
        raise TopologyError("grid dimensions must be positive")
    ax, ay = consumer_a
    bx, by = consumer_b
    for x, y in (consumer_a, consumer_b):
        if not (0 <= x < width and 0 <= y < height):
            raise TopologyError(f"consumer coordinate {(x, y)} outside {width}x{height} grid")
    if (ax, ay) == (bx, by):
        raise TopologyError("consumers must be at distinct coordinates")

    ids = np.arange(width * height).reshape(height, width)
    horizontal = np.stack([ids[:, :-1].ravel(), ids[:, 1:].ravel()], axis=1)
    vertical = np.stack([ids[:-1, :].ravel(), ids[1:, :].ravel()], axis=1)
    edges = np.concatenate([horizontal, vertical]).reshape(-1, 2)

    ys, xs = np.divmod(np.arange(width * height), width)
    roles = np.zeros(width * height, dtype=np.int8)
    roles[ay * width + ax] = CONSUMER_A
    roles[by * width + bx] = CONSUMER_B
    return _make(edges, roles, coords=np.stack([xs, ys], axis=1), kind="grid",
                 width=width, height=height)


def apply_brickwork_coloring(topology: Topology) -> Topology:
    """Colour a grid so that black edges form a brickwork lattice.

    Horizontal edges are black. The vertical edge from ``(x, y)`` to
    ``(x, y+1)`` is black when ``x + y`` is even and red otherwise, which
    leaves every interior node with three black edges and one red edge.
    """
    if not topology.is_grid:
        raise TopologyError("brickwork colouring needs a square grid")
    lo = topology.coords[topology.edges[:, 0]]
    hi = topology.coords[topology.edges[:, 1]]
    vertical = lo[:, 0] == hi[:, 0]
    low_y = np.minimum(lo[:, 1], hi[:, 1])
    red = vertical & ((lo[:, 0] + low_y) % 2 == 1)
    color = np.where(red, RED, BLACK).astype(np.int8)
    return topology.replace(color=color)


@dataclass(frozen=True)
class DegreeDistribution:
    """Finite-support node-degree distribution ``probs[d] = P(degree = d)``."""

    probs: np.ndarray
    tol: float = 1e-12

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=float)
        if probs.ndim != 1 or len(probs) == 0:
            raise ValueError("degree distribution must be a non-empty vector")
        if (probs < 0).any():
            raise ValueError("degree probabilities must be non-negative")
        if abs(probs.sum() - 1.0) > self.tol:
            raise ValueError(f"degree probabilities sum to {probs.sum()!r}, not 1")
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)
        if self.mean <= 0:
            raise ValueError("degree distribution has zero mean degree")

    @property
    def d_max(self) -> int:
        return len(self.probs) - 1

    @property
    def mean(self) -> float:
        return float(np.arange(len(self.probs)) @ self.probs)

    @classmethod
    def constant(cls, d: int) -> "DegreeDistribution":
        probs = np.zeros(d + 1)
        probs[d] = 1.0
        return cls(probs)

    @classmethod
    def poisson(cls, lam: float, d_max: int | None = None, tail: float = 1e-10) -> "DegreeDistribution":
        """Poisson(lam) truncated at ``d_max``; the cut tail mass joins the last bin."""
        from scipy import stats

        if d_max is None:
            d_max = int(stats.poisson.isf(tail, lam)) + 1
        probs = stats.poisson.pmf(np.arange(d_max + 1), lam)
        probs[-1] += stats.poisson.sf(d_max, lam)
        return cls(probs / probs.sum())

    def sample(self, size: int, rng: np.random.Generator) -> np.ndarray:
        return rng.choice(len(self.probs), size=size, p=self.probs)


def build_configuration_graph(dist: DegreeDistribution, n_nodes: int,
                              rng: np.random.Generator, consumers=None) -> Topology:
    """Configuration-model graph built by uniform stub matching.

    Self-loops and repeated edges are erased, keeping one copy of each
    multi-edge. An odd stub total is fixed by redrawing one node's degree.
    ``consumers`` optionally names the two consumer node ids.
    """
    if n_nodes < 1:
        raise TopologyError("n_nodes must be positive")
    if dist.probs[0] == 1.0:
        raise TopologyError("degenerate degree distribution (all nodes isolated)")
    degrees = dist.sample(n_nodes, rng)
    if degrees.sum() % 2:
        if dist.probs[0::2].sum() == 0.0:
            raise TopologyError("odd stub total cannot be repaired: no even degrees in support")
        node = int(rng.integers(n_nodes))
        old = degrees[node]
        while (degrees[node] - old) % 2 == 0:
            degrees[node] = dist.sample(1, rng)[0]
    stubs = np.repeat(np.arange(n_nodes), degrees)
    rng.shuffle(stubs)
    pairs = stubs.reshape(-1, 2)
    pairs = pairs[pairs[:, 0] != pairs[:, 1]]
    pairs = np.sort(pairs, axis=1)
    _, first = np.unique(pairs, axis=0, return_index=True)
    edges = pairs[np.sort(first)]

    roles = np.zeros(n_nodes, dtype=np.int8)
    topo = _make(edges, roles, kind="configuration")
    if consumers is not None:
        topo = topo.with_consumers(*consumers)
    return topo


def color_bounded_black(topology: Topology, n: int, rng: np.random.Generator) -> Topology:
    """Greedy random colouring with at most ``n`` black edges per node.

    Edges are visited in random order; an edge turns black when both of its
    endpoints still have fewer than ``n`` black edges, red otherwise.
    """
    if n < 1:
        raise ValueError("black-edge cap n must be >= 1")
    black = np.zeros(topology.n_nodes, dtype=np.int64)
    color = np.full(topology.n_edges, RED, dtype=np.int8)
    for e in rng.permutation(topology.n_edges):
        u, v = topology.edges[e]
        if black[u] < n and black[v] < n:
            color[e] = BLACK
            black[u] += 1
            black[v] += 1
    return topology.replace(color=color)


def default_partition(topology: Topology) -> np.ndarray:
    """Node partition for a grid whose consumers share a row.

    The grid is cut into four horizontal strips; the consumer row is the
    top row of strip 1. Each consumer keeps its right/left inner neighbour
    in strip 1 and its upper neighbour in strip 2. Its lower neighbour is
    joined to strip 0 by a one-column corridor, and its outer horizontal
    neighbour to strip 3 by a corridor running upward. Consumers get -1.
    """
    if not topology.is_grid:
        raise TopologyError("default partition needs a square grid")
    a, b = topology.consumer_a, topology.consumer_b
    (ax, ay), (bx, by) = topology.coords[a], topology.coords[b]
    if ay != by:
        raise TopologyError("default partition needs consumers on the same row; pass partition_map")
    if ax > bx:
        (ax, ay), (bx, by) = (bx, by), (ax, ay)
    w, h, y0 = topology.width, topology.height, int(ay)
    if bx - ax < 2 or ax < 1 or bx > w - 2:
        raise TopologyError("default partition needs interior consumers at least two columns apart")
    if y0 < 1 or h - y0 - 1 < 2:
        raise TopologyError("consumer row leaves no room for four strips; pass partition_map")

    b1 = (y0 + 1) // 2  # strip 0 = rows [0, b1), strip 1 = rows [b1, y0]
    b3 = y0 + 1 + (h - y0) // 2  # strip 2 = rows (y0, b3), strip 3 = rows [b3, h)
    if b1 < 1:
        b1 = 1
    ys = topology.coords[:, 1]
    part = np.select([ys < b1, ys <= y0, ys < b3], [0, 1, 2], 3).astype(np.int64)

    def column(x, y_from, y_to, label):
        for y in range(y_from, y_to + 1):
            part[y * w + x] = label

    column(ax, b1, y0 - 1, 0)
    column(bx, b1, y0 - 1, 0)
    column(ax - 1, y0, b3 - 1, 3)
    column(bx + 1, y0, b3 - 1, 3)
    part[topology.roles != HELPER] = -1
    return part


def divide_network(topology: Topology, partition_map=None) -> Topology:
    """Split the network into four sub-networks and erase the edges between them.

    ``partition_map`` assigns each helper node to 0..3 (a mapping or an
    array over all nodes; consumer entries are ignored). Each consumer
    edge inherits its helper neighbour's partition, and every partition must
    hold exactly one memory vertex of each consumer.
    """
    if partition_map is None:
        part = default_partition(topology)
    elif isinstance(partition_map, dict):
        part = np.full(topology.n_nodes, -1, dtype=np.int64)
        for node, label in partition_map.items():
            part[int(node)] = int(label)
    else:
        part = np.asarray(partition_map, dtype=np.int64).copy()
    part[topology.roles != HELPER] = -1
    helpers = topology.roles == HELPER
    if ((part[helpers] < 0) | (part[helpers] > 3)).any():
        raise TopologyError("every helper node needs a partition in 0..3")

    u, v = topology.edges[:, 0], topology.edges[:, 1]
    pu, pv = part[u], part[v]
    consumer_u, consumer_v = ~helpers[u], ~helpers[v]
    if (consumer_u & consumer_v).any():
        raise TopologyError("adjacent consumers cannot be divided")
    edge_part = np.where(consumer_u, pv, pu)
    keep = consumer_u | consumer_v | (pu == pv)

    for role in (CONSUMER_A, CONSUMER_B):
        node = topology.consumer(role)
        touching = keep & ((u == node) | (v == node))
        labels = np.sort(edge_part[touching])
        if not np.array_equal(labels, np.arange(4)):
            raise TopologyError(
                f"{ROLE_NAMES[role]} must have exactly one memory in each partition, got {labels.tolist()}"
            )
    return topology.replace(
        edges=topology.edges[keep],
        color=topology.color[keep],
        partition=edge_part[keep].astype(np.int8),
    )


# Text format, one record per line:
#   ghznet-topology 1
#   kind <kind> width <w|-> height <h|-> nodes <N> edges <E>
#   n <id> <role> <x|-> <y|->
#   e <u> <v> <color> <partition|none>

def dumps(topology: Topology) -> str:
    fmt = lambda v: "-" if v is None else str(v)
    lines = [
        "ghznet-topology 1",
        f"kind {topology.kind} width {fmt(topology.width)} height {fmt(topology.height)} "
        f"nodes {topology.n_nodes} edges {topology.n_edges}",
    ]
    for i, role in enumerate(topology.roles):
        if topology.coords is None:
            x = y = "-"
        else:
            x, y = topology.coords[i]
        lines.append(f"n {i} {ROLE_NAMES[int(role)]} {x} {y}")
    for (u, v), c, p in zip(topology.edges, topology.color, topology.partition):
        lines.append(f"e {u} {v} {COLOR_NAMES[int(c)]} {'none' if p < 0 else p}")
    return "\n".join(lines) + "\n"


def loads(text: str) -> Topology:
    role_ids = {name: k for k, name in ROLE_NAMES.items()}
    color_ids = {name: k for k, name in COLOR_NAMES.items()}
    lines = [ln.split() for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != ["ghznet-topology", "1"]:
        raise TopologyError("not a ghznet topology file")
    head = dict(zip(lines[1][0::2], lines[1][1::2]))
    n_nodes, n_edges = int(head["nodes"]), int(head["edges"])
    opt = lambda s: None if s == "-" else int(s)
    roles = np.zeros(n_nodes, dtype=np.int8)
    coords = np.zeros((n_nodes, 2), dtype=np.int64)
    has_coords = True
    edges, colors, parts = [], [], []
    for rec in lines[2:]:
        if rec[0] == "n":
            i = int(rec[1])
            roles[i] = role_ids[rec[2]]
            if rec[3] == "-":
                has_coords = False
            else:
                coords[i] = int(rec[3]), int(rec[4])
        elif rec[0] == "e":
            edges.append((int(rec[1]), int(rec[2])))
            colors.append(color_ids[rec[3]])
            parts.append(-1 if rec[4] == "none" else int(rec[4]))
        else:
            raise TopologyError(f"unknown record {rec[0]!r}")
    if len(edges) != n_edges:
        raise TopologyError(f"expected {n_edges} edges, found {len(edges)}")
    return _make(
        np.array(edges, dtype=np.int64).reshape(-1, 2), roles,
        color=np.array(colors, dtype=np.int8), partition=np.array(parts, dtype=np.int8),
        coords=coords if has_coords else None, kind=head["kind"],
        width=opt(head["width"]), height=opt(head["height"]),
    )


def save(topology: Topology, path) -> None:
    Path(path).write_text(dumps(topology))


def load(path) -> Topology:
    return loads(Path(path).read_text())
