"""Independent oracles the tests check the package against.

Everything here recomputes from first principles with simple data
structures; none of it shares code paths with the package internals.
"""

from __future__ import annotations

import itertools
from functools import lru_cache

from rcnet import Network
from rcnet.dtree import DtreeNode
from rcnet.spaces import Jointree


def naive_annotations(root: DtreeNode, network: Network) -> dict[int, dict]:
    """Recompute every dtree annotation straight from the definitions."""
    def vars_of(t: DtreeNode) -> frozenset[int]:
        if t.is_leaf:
            return frozenset((t.var,) + network.cpts[t.var].parents)
        return vars_of(t.left) | vars_of(t.right)

    out: dict[int, dict] = {}

    def walk(t: DtreeNode, ancestor_cutsets: list[frozenset[int]]) -> None:
        vs = vars_of(t)
        acutset = frozenset().union(*ancestor_cutsets) if ancestor_cutsets else frozenset()
        context = vs & acutset
        if t.is_leaf:
            cutset = frozenset()
            cluster = vs
        else:
            cutset = (vars_of(t.left) & vars_of(t.right)) - acutset
            cluster = cutset | context
        out[t.id] = {
            "vars": vs, "acutset": acutset, "cutset": cutset,
            "context": context, "cluster": cluster,
        }
        if not t.is_leaf:
            walk(t.left, ancestor_cutsets + [cutset])
            walk(t.right, ancestor_cutsets + [cutset])

    walk(root, [])
    return out


def exact_treewidth(adj: list[set[int]]) -> int:
    """Exact treewidth by dynamic programming over elimination subsets.

    Exponential in the vertex count; keep graphs at 8 vertices or fewer.
    The neighborhood of v after eliminating a set S is every vertex
    outside S reachable from v through S.
    """
    n = len(adj)
    if n == 0:
        return -1

    def degree_after(v: int, mask: int) -> int:
        seen = 1 << v
        stack = [v]
        count = 0
        while stack:
            u = stack.pop()
            for w in adj[u]:
                bit = 1 << w
                if seen & bit:
                    continue
                seen |= bit
                if mask & bit:
                    stack.append(w)
                else:
                    count += 1
        return count

    @lru_cache(maxsize=None)
    def best(mask: int) -> int:
        if mask == 0:
            return -1
        out = n
        for v in range(n):
            bit = 1 << v
            if mask & bit:
                prev = mask ^ bit
                out = min(out, max(best(prev), degree_after(v, prev)))
        return out

    return best((1 << n) - 1)


def brute_fill_counts(adj: list[set[int]], remaining: set[int]) -> dict[int, int]:
    """Fill-edge counts for every candidate, counted pairwise from scratch."""
    counts = {}
    for v in remaining:
        neigh = [u for u in adj[v] if u in remaining]
        fills = 0
        for a, b in itertools.combinations(neigh, 2):
            if b not in adj[a]:
                fills += 1
        counts[v] = fills
    return counts


def reference_fill_order(adj: list[set[int]]) -> list[int]:
    """Greedy min-fill recomputed independently (same tie rule:
    fills, then neighborhood size, then id)."""
    work = [set(s) for s in adj]
    remaining = set(range(len(adj)))
    order = []
    while remaining:
        counts = brute_fill_counts(work, remaining)
        v = min(remaining, key=lambda u: (counts[u], len([w for w in work[u] if w in remaining]), u))
        order.append(v)
        neigh = [u for u in work[v] if u in remaining]
        for a, b in itertools.combinations(neigh, 2):
            work[a].add(b)
            work[b].add(a)
        remaining.discard(v)
    return order


def check_running_intersection(jt: Jointree) -> bool:
    """Clusters containing any one variable must form a connected subtree."""
    neighbors: dict[int, list[int]] = {i: [] for i in range(len(jt.nodes))}
    for parent, child, _ in jt.edges:
        neighbors[parent].append(child)
        neighbors[child].append(parent)
    all_vars = set().union(*jt.nodes) if jt.nodes else set()
    for v in all_vars:
        holders = {i for i, cluster in enumerate(jt.nodes) if v in cluster}
        if not holders:
            return False
        start = next(iter(holders))
        seen = {start}
        stack = [start]
        while stack:
            u = stack.pop()
            for w in neighbors[u]:
                if w in holders and w not in seen:
                    seen.add(w)
                    stack.append(w)
        if seen != holders:
            return False
    return True


def elimination_cliques(adj: list[set[int]], order: list[int]) -> list[frozenset[int]]:
    """The clique {v} | neighbors(v) formed at each elimination step."""
    work = [set(s) for s in adj]
    cliques = []
    for v in order:
        neigh = list(work[v])
        cliques.append(frozenset([v] + neigh))
        for a, b in itertools.combinations(neigh, 2):
            work[a].add(b)
            work[b].add(a)
        for a in neigh:
            work[a].discard(v)
        work[v].clear()
    return cliques


def replay_kb(kb_factory, surviving_asserts):
    """Fresh KB with the surviving assertion sequence replayed onto it."""
    fresh = kb_factory()
    for literal in surviving_asserts:
        ok = fresh.assert_literal(literal)
        assert ok, "replay oracle hit a contradiction the original run survived"
    return fresh
