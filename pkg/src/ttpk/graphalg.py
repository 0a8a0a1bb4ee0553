"""Graph subroutines: MST, perfect matching, Hamiltonian cycles, k-packings and TSP references."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional

import networkx as nx
import numpy as np

from .errors import (
    NotAMatching,
    NotDivisible,
    OddVertexCount,
    StrategyUnavailable,
    WrongKind,
)

HELD_KARP_MAX = 14


@dataclass(frozen=True, eq=False)
class WeightedGraph:
    """Complete graph on a subset of teams, weights borrowed from the full matrix."""

    vertices: tuple
    dist: np.ndarray
    positions: Optional[np.ndarray] = None

    @property
    def size(self):
        return len(self.vertices)

    @property
    def mat(self):
        idx = np.asarray(self.vertices, dtype=np.int64)
        return self.dist[np.ix_(idx, idx)]

    def w(self, u, v):
        return self.dist[u, v]

    def total_weight(self):
        return self.mat.sum() / 2


def graph_of(inst, vertices=None):
    if vertices is None:
        vertices = range(inst.n)
    vertices = tuple(int(v) for v in vertices)
    pos = None
    if inst.line_gaps is not None:
        pos = np.concatenate([[0], np.cumsum(inst.line_gaps)])
    return WeightedGraph(vertices, inst.dist, pos)


def cycle_weight(dist, order):
    if len(order) < 2:
        return dist.dtype.type(0)
    idx = np.asarray(order)
    return dist[idx, np.roll(idx, -1)].sum()


def path_weight(dist, order):
    idx = np.asarray(order)
    return dist[idx[:-1], idx[1:]].sum()


# ---------------------------------------------------------------- spanning trees


def _prim(mat):
    """Prim on a dense matrix; returns parent array (root 0) with lowest-index ties."""
    n = mat.shape[0]
    in_tree = np.zeros(n, dtype=bool)
    best = np.full(n, np.inf)
    parent = np.full(n, -1)
    best[0] = 0
    for _ in range(n):
        cand = np.where(in_tree, np.inf, best)
        u = int(np.argmin(cand))
        in_tree[u] = True
        upd = (~in_tree) & (mat[u] < best)
        best[upd] = mat[u][upd]
        parent[upd] = u
    return parent


def minimum_spanning_tree(g):
    """Edges (as vertex-id pairs) and total weight of a minimum spanning tree."""
    if g.size == 0:
        raise ValueError("empty graph")
    mat = g.mat
    parent = _prim(mat)
    edges = []
    weight = mat.dtype.type(0)
    for v in range(1, g.size):
        p = parent[v]
        a, b = sorted((g.vertices[p], g.vertices[v]))
        edges.append((a, b))
        weight += mat[p, v]
    return sorted(edges), weight


def mst_weight(mat):
    if mat.shape[0] <= 1:
        return 0
    parent = _prim(mat)
    idx = np.arange(1, mat.shape[0])
    return mat[parent[idx], idx].sum()


# ---------------------------------------------------------------- packings


@dataclass(frozen=True)
class Packing:
    kind: str
    k: int
    components: list
    total_weight: float

    @property
    def vertices(self):
        return [v for c in self.components for v in c]


def component_weight(dist, comp, kind):
    if kind == "k_path" or kind == "matching":
        return path_weight(dist, comp)
    return cycle_weight(dist, comp)


def make_packing(dist, kind, k, components):
    comps = [tuple(int(v) for v in c) for c in components]
    total = sum((component_weight(dist, c, kind) for c in comps), dist.dtype.type(0))
    return Packing(kind, k, comps, total.item() if hasattr(total, "item") else total)


def check_packing(p, g, dist):
    """Raise AssertionError unless p is a disjoint cover of g with correct weight."""
    seen = [v for c in p.components for v in c]
    assert sorted(seen) == sorted(g.vertices), "components must partition the vertex set"
    assert all(len(c) == p.k for c in p.components), "component size mismatch"
    recomputed = sum(component_weight(dist, c, p.kind) for c in p.components)
    assert abs(recomputed - p.total_weight) <= 1e-9 * max(1.0, abs(recomputed))


# ---------------------------------------------------------------- matching


def min_weight_perfect_matching(g):
    """Exact minimum-weight perfect matching via the blossom algorithm."""
    if g.size % 2:
        raise OddVertexCount(f"perfect matching needs an even vertex count, got {g.size}")
    mat = g.mat
    n = g.size
    if n == 0:
        return make_packing(g.dist, "matching", 2, [])
    top = mat.max() + 1
    G = nx.Graph()
    G.add_nodes_from(range(n))
    for i in range(n):
        for j in range(i + 1, n):
            G.add_edge(i, j, weight=(top - mat[i, j]).item())
    mate = nx.max_weight_matching(G, maxcardinality=True)
    pairs = sorted(tuple(sorted((g.vertices[a], g.vertices[b]))) for a, b in mate)
    if len(pairs) * 2 != n:
        raise RuntimeError("blossom returned a non-perfect matching")
    return make_packing(g.dist, "matching", 2, pairs)


def brute_force_matching(mat):
    """Exhaustive minimum perfect matching weight (small oracle)."""
    n = mat.shape[0]

    def rec(rest):
        if not rest:
            return 0
        a = rest[0]
        best = None
        for i in range(1, len(rest)):
            val = mat[a, rest[i]] + rec(rest[1:i] + rest[i + 1:])
            if best is None or val < best:
                best = val
        return best

    return rec(tuple(range(n)))


def _check_matching(g, m):
    if m.kind != "matching":
        raise NotAMatching(f"expected a matching, got {m.kind}")
    verts = [v for e in m.components for v in e]
    if any(len(e) != 2 for e in m.components) or sorted(verts) != sorted(g.vertices):
        raise NotAMatching("edges do not form a perfect matching of the graph")


# ---------------------------------------------------------------- Hamiltonian cycles


def _euler_circuit(n, edges):
    """Hierholzer on a multigraph with vertices 0..n-1; lowest neighbor first."""
    adj = [[] for _ in range(n)]
    for eid, (a, b) in enumerate(edges):
        adj[a].append((b, eid))
        adj[b].append((a, eid))
    for lst in adj:
        lst.sort()
    used = [False] * len(edges)
    ptr = [0] * n
    stack, circuit = [0], []
    while stack:
        v = stack[-1]
        while ptr[v] < len(adj[v]) and used[adj[v][ptr[v]][1]]:
            ptr[v] += 1
        if ptr[v] == len(adj[v]):
            circuit.append(stack.pop())
        else:
            u, eid = adj[v][ptr[v]]
            used[eid] = True
            stack.append(u)
    return circuit[::-1]


def christofides_cycle(g):
    """Christofides-Serdyukov tour: MST + matching on odd vertices + shortcut Euler circuit."""
    n = g.size
    if n < 3:
        return list(g.vertices)
    mat = g.mat
    parent = _prim(mat)
    edges = [(int(parent[v]), v) for v in range(1, n)]
    deg = np.zeros(n, dtype=int)
    for a, b in edges:
        deg[a] += 1
        deg[b] += 1
    odd = [v for v in range(n) if deg[v] % 2]
    sub = WeightedGraph(tuple(odd), mat)
    for a, b in min_weight_perfect_matching(sub).components:
        edges.append((a, b))
    tour, seen = [], set()
    for v in _euler_circuit(n, edges):
        if v not in seen:
            seen.add(v)
            tour.append(v)
    return [g.vertices[v] for v in tour]


def matching_based_cycle(g, m, mode="derandomized", seed=0):
    """Hamiltonian cycle through every matching edge, joined by connector edges.

    In derandomized mode the listing order and orientation of matching edges are
    fixed greedily by conditional expectation, so the connector weight never
    exceeds w(E minus M) / (n - 2).
    """
    _check_matching(g, m)
    edges = [tuple(e) for e in m.components]
    q = len(edges)
    if q == 0:
        return []
    if q == 1:
        return list(edges[0])
    if mode == "randomized":
        rng = np.random.default_rng(seed)
        order = rng.permutation(q)
        flips = rng.integers(0, 2, size=q)
        cyc = []
        for i, f in zip(order, flips):
            a, b = edges[i]
            cyc.extend((b, a) if f else (a, b))
        return cyc
    if mode != "derandomized":
        raise ValueError(f"unknown mode {mode!r}")
    return _derandomized_listing(g.dist, edges)


def _derandomized_listing(dist, edges):
    dist = dist.astype(np.float64)
    q = len(edges)
    ends = np.array(edges)
    inner = dist[ends[:, 0], ends[:, 1]]

    def remainder(head, tail, rest):
        # expected connector weight when `rest` edges follow in uniform random order/orientation
        if not rest:
            return dist[tail, head]
        pts = ends[rest].ravel()
        first = dist[tail, pts].mean()
        close = dist[pts, head].mean()
        qq = len(rest)
        if qq == 1:
            return first + close
        block = dist[np.ix_(pts, pts)]
        cross = (block.sum() / 2 - inner[rest].sum()) / (2 * qq * (qq - 1))
        return first + (qq - 1) * cross + close

    rest = list(range(q))
    best = None
    for i in rest:
        for a, b in (edges[i], edges[i][::-1]):
            others = [j for j in rest if j != i]
            val = remainder(a, b, others)
            if best is None or val < best[0] - 1e-12:
                best = (val, i, a, b)
    _, i, head, tail = best
    cyc = [head, tail]
    rest.remove(i)
    while rest:
        best = None
        for i in rest:
            for a, b in (edges[i], edges[i][::-1]):
                others = [j for j in rest if j != i]
                val = dist[tail, a] + remainder(head, b, others)
                if best is None or val < best[0] - 1e-12:
                    best = (val, i, a, b)
        _, i, a, b = best
        cyc.extend((a, b))
        tail = b
        rest.remove(i)
    return cyc


def matching_cycle_bound(g, m):
    """w(M) + w(E minus M) / (n - 2), the expected weight of a random listing."""
    n = g.size
    wm = m.total_weight
    rest = g.total_weight() - wm
    return wm + rest / (n - 2)


# ---------------------------------------------------------------- TSP


def held_karp(mat, closed=True):
    """Exact tour (closed) or Hamiltonian path (open) weight and order by subset DP."""
    n = mat.shape[0]
    if n <= 1:
        return 0, list(range(n))
    if n == 2:
        return (2 * mat[0, 1] if closed else mat[0, 1]), [0, 1]
    mat = np.asarray(mat, dtype=np.float64)
    if not closed:
        # an open path equals a closed tour through an extra zero-cost vertex
        ext = np.zeros((n + 1, n + 1))
        ext[1:, 1:] = mat
        val, order = held_karp(ext, closed=True)
        i = order.index(0)
        path = [v - 1 for v in order[i + 1:] + order[:i]]
        return val, path
    m = n - 1
    full = 1 << m
    dp = np.full((full, m), np.inf)
    par = np.full((full, m), -1, dtype=np.int64)
    sub = mat[1:, 1:]
    for j in range(m):
        dp[1 << j, j] = mat[0, j + 1]
    for mask in range(1, full):
        row = dp[mask]
        if not np.isfinite(row).any():
            continue
        cand = row[:, None] + sub
        arg = np.argmin(cand, axis=0)
        val = cand[arg, np.arange(m)]
        for j in range(m):
            bit = 1 << j
            if mask & bit:
                continue
            nm = mask | bit
            if val[j] < dp[nm, j]:
                dp[nm, j] = val[j]
                par[nm, j] = arg[j]
    last = dp[full - 1] + mat[1:, 0]
    j = int(np.argmin(last))
    best = last[j]
    order, mask = [], full - 1
    while j >= 0:
        order.append(j + 1)
        pj = par[mask, j]
        mask ^= 1 << j
        j = int(pj)
    order.append(0)
    return best, order[::-1]


def brute_force_tsp(mat):
    n = mat.shape[0]
    best = None
    for perm in itertools.permutations(range(1, n)):
        if perm[0] > perm[-1]:
            continue
        val = mat[0, perm[0]] + mat[perm[-1], 0] + sum(mat[a, b] for a, b in zip(perm, perm[1:]))
        if best is None or val < best:
            best = val
    return best


def one_tree_bound(mat):
    """Max over roots of MST(V - root) plus the two cheapest root edges."""
    n = mat.shape[0]
    if n < 3:
        return 2 * mat.max() if n == 2 else 0
    best = 0
    for r in range(n):
        keep = [v for v in range(n) if v != r]
        tree = mst_weight(mat[np.ix_(keep, keep)])
        two = np.sort(mat[r, keep])[:2].sum()
        best = max(best, tree + two)
    return best


@dataclass(frozen=True)
class TSPReference:
    value: float
    exact: bool


def tsp_reference(g):
    """Exact optimum for at most HELD_KARP_MAX vertices, else the 1-tree lower bound."""
    mat = g.mat
    if g.size <= HELD_KARP_MAX:
        val, _ = held_karp(mat)
        return TSPReference(float(val), True)
    return TSPReference(float(one_tree_bound(mat)), False)


# ---------------------------------------------------------------- k-packings


def best_order(dist, verts, closed):
    """Cheapest cycle (closed) or path through verts, as a vertex tuple."""
    verts = list(verts)
    if len(verts) <= 3 and closed:
        return tuple(verts)
    if len(verts) <= 2:
        return tuple(verts)
    if len(verts) <= 6:
        verts.sort()
        sub = dist[np.ix_(verts, verts)].tolist()
        idx = list(range(len(verts)))
        best = None
        if closed:
            head, tails = idx[:1], itertools.permutations(idx[1:])
        else:
            head, tails = [], itertools.permutations(idx)
        for tail in tails:
            if tail[0] > tail[-1]:
                continue
            order = head + list(tail)
            val = sum(sub[a][b] for a, b in zip(order, order[1:]))
            if closed:
                val += sub[order[-1]][order[0]]
            if best is None or val < best[0]:
                best = (val, order)
        return tuple(verts[i] for i in best[1])
    sub = dist[np.ix_(verts, verts)]
    _, order = held_karp(sub, closed=closed)
    order = [verts[i] for i in order]
    if closed:
        i = order.index(min(order))
        order = order[i:] + order[:i]
    elif order[0] > order[-1]:
        order.reverse()
    return tuple(order)


def _exact_small(g, k, kind):
    if g.size > 12:
        raise StrategyUnavailable("exact_small supports at most 12 vertices")
    verts = list(g.vertices)
    n = len(verts)
    closed = kind == "k_cycle"
    group_cost = {}
    for combo in itertools.combinations(range(n), k):
        mask = sum(1 << i for i in combo)
        order = best_order(g.dist, [verts[i] for i in combo], closed)
        group_cost[mask] = (component_weight(g.dist, order, kind), order)
    full = (1 << n) - 1
    memo = {0: (0, ())}

    def solve(mask):
        if mask in memo:
            return memo[mask]
        low = (mask & -mask).bit_length() - 1
        others = [i for i in range(n) if mask >> i & 1 and i != low]
        best = None
        for rest in itertools.combinations(others, k - 1):
            gm = (1 << low) | sum(1 << i for i in rest)
            cost, order = group_cost[gm]
            sub_cost, sub_groups = solve(mask & ~gm)
            tot = cost + sub_cost
            if best is None or tot < best[0]:
                best = (tot, (order,) + sub_groups)
        memo[mask] = best
        return best

    _, groups = solve(full)
    return list(groups)


def _small_order(L, verts, closed):
    """best_order on a list-of-lists matrix for at most six vertices."""
    verts = sorted(verts)
    if len(verts) <= 2 or (closed and len(verts) == 3):
        order = verts
    else:
        best = None
        head, rest = (verts[:1], verts[1:]) if closed else ([], verts)
        for tail in itertools.permutations(rest):
            if tail[0] > tail[-1]:
                continue
            o = head + list(tail)
            val = sum(L[a][b] for a, b in zip(o, o[1:])) + (L[o[-1]][o[0]] if closed else 0)
            if best is None or val < best[0]:
                best = (val, o)
        order = best[1]
    val = sum(L[a][b] for a, b in zip(order, order[1:]))
    if closed and len(order) > 1:
        val += L[order[-1]][order[0]]
    return tuple(order), val


def _greedy_local(g, k, kind):
    """Nearest-neighbour groups, then best pairwise swaps until no swap gains."""
    dist = g.dist
    closed = kind == "k_cycle"
    L = dist.tolist()
    seen = {}

    def order_of(comp):
        key = tuple(sorted(comp))
        if key not in seen:
            if k <= 6:
                seen[key] = _small_order(L, key, closed)
            else:
                o = best_order(dist, key, closed)
                seen[key] = (o, component_weight(dist, o, kind))
        return seen[key]

    left = sorted(g.vertices)
    comps, cost = [], []
    while left:
        comp = [left.pop(0)]
        while len(comp) < k:
            last = comp[-1]
            nxt = min(left, key=lambda v: (dist[last, v], v))
            left.remove(nxt)
            comp.append(nxt)
        o, w = order_of(comp)
        comps.append(o)
        cost.append(w)
    improved = True
    while improved:
        improved = False
        for a in range(len(comps)):
            for b in range(a + 1, len(comps)):
                best = None
                for i in range(k):
                    for j in range(k):
                        ca = list(comps[a])
                        cb = list(comps[b])
                        ca[i], cb[j] = cb[j], ca[i]
                        oa, wa = order_of(ca)
                        ob, wb = order_of(cb)
                        gain = cost[a] + cost[b] - wa - wb
                        if gain > 1e-9 and (best is None or gain > best[0]):
                            best = (gain, oa, ob, wa, wb)
                if best is not None:
                    _, comps[a], comps[b], cost[a], cost[b] = best
                    improved = True
    return comps


def _line_blocks(g, k, kind):
    if g.positions is None:
        raise StrategyUnavailable("line_blocks needs a line instance")
    verts = sorted(g.vertices, key=lambda v: (g.positions[v], v))
    return [tuple(verts[i:i + k]) for i in range(0, len(verts), k)]


STRATEGIES = {"exact_small": _exact_small, "greedy_local": _greedy_local, "line_blocks": _line_blocks}


def k_packing(g, k, kind="k_cycle", strategy="greedy_local"):
    """Vertex-disjoint cover of g by cycles or paths of exactly k vertices."""
    if kind not in ("k_cycle", "k_path"):
        raise WrongKind(f"unknown packing kind {kind!r}")
    if k < 1 or g.size % k:
        raise NotDivisible(f"{g.size} vertices cannot be split into groups of {k}")
    if strategy not in STRATEGIES:
        raise StrategyUnavailable(f"unknown strategy {strategy!r}")
    comps = STRATEGIES[strategy](g, k, kind)
    return make_packing(g.dist, kind, k, comps)


def complete_paths(p, dist):
    """Close every path of a k-path packing into a cycle."""
    if p.kind != "k_path":
        raise WrongKind(f"expected a k_path packing, got {p.kind}")
    return make_packing(dist, "k_cycle", p.k, p.components)
