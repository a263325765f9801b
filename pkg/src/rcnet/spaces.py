"""Memory accounting for exact inference over one network.

Four space models, all counted in table cells (one stored probability
each, 8 bytes if you want bytes):

    hugin          one table per jointree cluster plus one per separator
    shenoy_shafer  one table per separator (inward pass; double for both)
    ve             one table per cluster created while eliminating
    rc             one cell per context instantiation at caching dtree
                   nodes, reported with and without dead caches

The jointree induced by a dtree has one cluster per dtree node and a
separator per edge equal to the child's context.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .dtree import DtreeNode, LIVE, instantiation_count, iter_nodes
from .model import Network

__all__ = [
    "Jointree",
    "SpaceReport",
    "induce_jointree",
    "hugin_space",
    "shenoy_shafer_space",
    "ve_space",
    "rc_space",
    "space_report",
]


@dataclass(frozen=True)
class Jointree:
    """Tree of clusters with separator-labelled edges.

    nodes[i] is a cluster (frozenset of variable ids); leaf_flags[i]
    says whether it came from a dtree leaf.  Edges are
    (parent_index, child_index, separator).
    """

    nodes: tuple[frozenset[int], ...]
    leaf_flags: tuple[bool, ...]
    edges: tuple[tuple[int, int, frozenset[int]], ...]
    cards: tuple[int, ...]


@dataclass(frozen=True)
class SpaceReport:
    hugin_cells: int
    shenoy_shafer_cells: int
    ve_cells: int
    rc_cells_all: int
    rc_cells_live: int

    def bytes(self, per_cell: int = 8) -> dict[str, int]:
        return {
            "hugin": self.hugin_cells * per_cell,
            "shenoy_shafer": self.shenoy_shafer_cells * per_cell,
            "ve": self.ve_cells * per_cell,
            "rc_all": self.rc_cells_all * per_cell,
            "rc_live": self.rc_cells_live * per_cell,
        }


def induce_jointree(root: DtreeNode) -> Jointree:
    """Jointree whose clusters are the dtree clusters.

    Edges mirror the dtree's parent-child edges; the separator on the
    edge into child t is context(t).  The result is binary (at most
    three neighbors per cluster).
    """
    network = root.network
    nodes = []
    leaf_flags = []
    edges = []
    index: dict[int, int] = {}
    for node in iter_nodes(root):
        index[node.id] = len(nodes)
        nodes.append(node.cluster)
        leaf_flags.append(node.is_leaf)
    for node in iter_nodes(root):
        if node.parent is not None:
            edges.append((index[node.parent.id], index[node.id], node.context))
    return Jointree(
        nodes=tuple(nodes),
        leaf_flags=tuple(leaf_flags),
        edges=tuple(edges),
        cards=network.cards,
    )


def shenoy_shafer_space(
    jt: Jointree,
    doubled: bool = False,
    internal_child_edges_only: bool = False,
) -> int:
    """Total separator cells.

    doubled counts two tables per separator (full two-pass
    propagation).  internal_child_edges_only restricts to edges whose
    child cluster came from an internal dtree node, the portion that
    mirrors rc caching.
    """
    total = 0
    for _, child, sep in jt.edges:
        if internal_child_edges_only and jt.leaf_flags[child]:
            continue
        total += instantiation_count(sep, jt.cards)
    return total * (2 if doubled else 1)


def hugin_space(jt: Jointree) -> int:
    """Cluster cells plus separator cells."""
    total = sum(instantiation_count(cluster, jt.cards) for cluster in jt.nodes)
    return total + shenoy_shafer_space(jt)


def ve_space(network: Network, order: Sequence[int]) -> int:
    """Cells of the tables built while eliminating along the order."""
    if sorted(order) != list(range(network.n)):
        raise ValueError("elimination order is not a permutation of the variable ids")
    from .dtree import moral_graph

    adj = moral_graph(network)
    total = 0
    for v in order:
        total += instantiation_count([v] + list(adj[v]), network.cards)
        neigh = list(adj[v])
        for i, a in enumerate(neigh):
            for b in neigh[i + 1:]:
                adj[a].add(b)
                adj[b].add(a)
        for a in neigh:
            adj[a].discard(v)
        adj[v].clear()
    return total


def rc_space(root: DtreeNode) -> tuple[int, int]:
    """(cells_all, cells_live) over caching candidates.

    cells_all sums context instantiations at internal non-root nodes;
    cells_live keeps only caches still marked live.
    """
    cells_all = 0
    cells_live = 0
    for node in iter_nodes(root):
        if node.is_leaf or node.parent is None:
            continue
        cells_all += node.cells
        if node.cache_state == LIVE:
            cells_live += node.cells
    return cells_all, cells_live


def space_report(network: Network, order: Sequence[int], root: DtreeNode) -> SpaceReport:
    jt = induce_jointree(root)
    cells_all, cells_live = rc_space(root)
    return SpaceReport(
        hugin_cells=hugin_space(jt),
        shenoy_shafer_cells=shenoy_shafer_space(jt),
        ve_cells=ve_space(network, order),
        rc_cells_all=cells_all,
        rc_cells_live=cells_live,
    )
