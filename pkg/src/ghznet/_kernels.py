"""Compiled inner loops. All arrays are indexed by memory vertex unless noted."""
import numpy as np
from numba import njit

_JIT = dict(cache=True, nogil=True)


@njit(**_JIT)
def find(parent, x):
    root = x
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:
        nxt = parent[x]
        parent[x] = root
        x = nxt
    return root


@njit(**_JIT)
def union(parent, rank, a, b):
    ra = find(parent, a)
    rb = find(parent, b)
    if ra == rb:
        return ra
    if rank[ra] < rank[rb]:
        ra, rb = rb, ra
    parent[rb] = ra
    if rank[ra] == rank[rb]:
        rank[ra] += 1
    return ra


@njit(**_JIT)
def _smallest_keys(cand, m, keys, take):
    """Mark the ``take`` entries of ``cand[:m]`` with the smallest keys."""
    chosen = np.zeros(m, dtype=np.bool_)
    for _ in range(take):
        best = -1
        for i in range(m):
            if not chosen[i] and (best < 0 or keys[cand[i]] < keys[cand[best]]):
                best = i
        chosen[best] = True
    return chosen


@njit(**_JIT)
def select_fusions(ptr, verts, roles, link_ok, color, keys, n, brickwork,
                   in_fusion, measured, planned):
    """Fill the fusion plan in place; see ``protocol.select_fusions``."""
    n_nodes = len(ptr) - 1
    black = np.empty(64, dtype=np.int64)
    red = np.empty(64, dtype=np.int64)
    for node in range(n_nodes):
        if roles[node] != 0:
            continue
        nb = 0
        nr = 0
        deg = ptr[node + 1] - ptr[node]
        if deg > len(black):
            black = np.empty(deg, dtype=np.int64)
            red = np.empty(deg, dtype=np.int64)
        for j in range(ptr[node], ptr[node + 1]):
            v = verts[j]
            if not link_ok[v >> 1]:
                continue
            if brickwork and color[v >> 1] == 2:
                red[nr] = v
                nr += 1
            else:
                black[nb] = v
                nb += 1
        size = 0
        if nb >= n:
            chosen = _smallest_keys(black, nb, keys, n)
            for i in range(nb):
                if chosen[i]:
                    in_fusion[black[i]] = True
                else:
                    measured[black[i]] = True
            for i in range(nr):
                measured[red[i]] = True
            size = n
        else:
            for i in range(nb):
                in_fusion[black[i]] = True
            room = n - nb
            if nr <= room:
                for i in range(nr):
                    in_fusion[red[i]] = True
                size = nb + nr
            else:
                chosen = _smallest_keys(red, nr, keys, room)
                for i in range(nr):
                    if chosen[i]:
                        in_fusion[red[i]] = True
                    else:
                        measured[red[i]] = True
                size = n
        if size == 1:
            for j in range(ptr[node], ptr[node + 1]):
                v = verts[j]
                if in_fusion[v]:
                    in_fusion[v] = False
                    measured[v] = True
        planned[node] = size >= 2


@njit(**_JIT)
def resolve(ptr, verts, vertex_node, roles, link_ok, in_fusion, planned, fusion_ok,
            parent, active):
    """Union-find over memory vertices for one cycle; ``parent`` ends fully compressed."""
    n_vert = len(vertex_node)
    rank = np.zeros(n_vert, dtype=np.int8)
    for v in range(n_vert):
        parent[v] = v
        node = vertex_node[v]
        active[v] = roles[node] != 0 or (in_fusion[v] and planned[node] and fusion_ok[node])
    n_nodes = len(ptr) - 1
    for node in range(n_nodes):
        if not (planned[node] and fusion_ok[node]):
            continue
        first = -1
        for j in range(ptr[node], ptr[node + 1]):
            v = verts[j]
            if in_fusion[v]:
                if first < 0:
                    first = v
                else:
                    union(parent, rank, first, v)
    for e in range(n_vert // 2):
        if link_ok[e] and active[2 * e] and active[2 * e + 1]:
            union(parent, rank, 2 * e, 2 * e + 1)
    for v in range(n_vert):
        find(parent, v)


@njit(**_JIT)
def node_membership_largest(ptr, verts, link_ok, active, parent, n_nodes):
    """Fraction of nodes touching the largest component.

    A node touches component C when one of its successful links has an
    active end in C, on either side of the link.
    """
    n_vert = len(parent)
    count = np.zeros(n_vert, dtype=np.int64)
    seen = np.empty(2 * 64, dtype=np.int64)
    for node in range(n_nodes):
        m = 0
        deg = ptr[node + 1] - ptr[node]
        if 2 * deg > len(seen):
            seen = np.empty(2 * deg, dtype=np.int64)
        for j in range(ptr[node], ptr[node + 1]):
            v = verts[j]
            if not link_ok[v >> 1]:
                continue
            for w in (v, v ^ 1):
                if active[w]:
                    r = parent[w]
                    dup = False
                    for i in range(m):
                        if seen[i] == r:
                            dup = True
                            break
                    if not dup:
                        seen[m] = r
                        m += 1
        for i in range(m):
            count[seen[i]] += 1
    best = 0
    for r in range(n_vert):
        if count[r] > best:
            best = count[r]
    return best / n_nodes


@njit(**_JIT)
def newman_ziff(edges, order, element, n_elements, n_nodes, consumer_a, consumer_b,
                largest, connected, shared):
    """Add edges in ``order``; record observables after each of ``0..E`` additions.

    ``element`` maps each memory vertex to its union-find element: helpers
    use their node id, consumer memories get private elements so a consumer
    never bridges its own links. ``largest`` uses a separate plain node-level
    structure.
    """
    parent = np.arange(n_elements)
    rank = np.zeros(n_elements, dtype=np.int8)
    nparent = np.arange(n_nodes)
    nsize = np.ones(n_nodes, dtype=np.int64)
    big = 1
    largest[0] = big / n_nodes
    na = len(consumer_a)
    nbb = len(consumer_b)
    roots_a = np.empty(max(na, 1), dtype=np.int64)
    is_connected = False
    for step in range(len(order)):
        e = order[step]
        u = edges[e, 0]
        v = edges[e, 1]
        ru = find(nparent, u)
        rv = find(nparent, v)
        if ru != rv:
            if nsize[ru] < nsize[rv]:
                ru, rv = rv, ru
            nparent[rv] = ru
            nsize[ru] += nsize[rv]
            if nsize[ru] > big:
                big = nsize[ru]
        union(parent, rank, element[2 * e], element[2 * e + 1])
        largest[step + 1] = big / n_nodes
        count = 0
        for i in range(na):
            roots_a[i] = find(parent, consumer_a[i])
        for i in range(na):
            dup = False
            for k in range(i):
                if roots_a[k] == roots_a[i]:
                    dup = True
                    break
            if dup:
                continue
            for j in range(nbb):
                if find(parent, consumer_b[j]) == roots_a[i]:
                    count += 1
                    break
        shared[step + 1] = count
        if count > 0:
            is_connected = True
        connected[step + 1] = is_connected
    shared[0] = 0
    connected[0] = False


@njit(**_JIT)
def touches_both(ptr, verts, link_ok, active, parent, side_a, side_b):
    """True when one component touches a node of ``side_a`` and a node of ``side_b``."""
    mark = np.zeros(len(parent), dtype=np.bool_)
    for node in side_a:
        for j in range(ptr[node], ptr[node + 1]):
            v = verts[j]
            if link_ok[v >> 1]:
                if active[v]:
                    mark[parent[v]] = True
                if active[v ^ 1]:
                    mark[parent[v ^ 1]] = True
    for node in side_b:
        for j in range(ptr[node], ptr[node + 1]):
            v = verts[j]
            if link_ok[v >> 1]:
                if active[v] and mark[parent[v]]:
                    return True
                if active[v ^ 1] and mark[parent[v ^ 1]]:
                    return True
    return False
