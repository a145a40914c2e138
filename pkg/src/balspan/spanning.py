"""Spanning trees over items and over clusters, and small tree utilities."""

from __future__ import annotations

import math
from collections import deque
from collections.abc import Callable, Hashable, Iterable, Sequence
from dataclasses import dataclass
from typing import Any, Optional

from .model import (
    Cluster,
    ClusteringSolution,
    DisconnectedError,
    ProblemInstance,
    RootedTree,
)

Edge = tuple[Any, Any, float]


class UnionFind:
    def __init__(self, nodes: Iterable[Hashable]):
        self.parent = {n: n for n in nodes}
        self.size = {n: 1 for n in self.parent}

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        return True


def kruskal(
    nodes: Sequence[Hashable], edges: Iterable[Edge], key: Callable[[Any], Any]
) -> tuple[list[Edge], bool]:
    """Minimum spanning forest; ties broken by (w, min endpoint, max endpoint) under ``key``.

    Returns the chosen edges (each oriented min-endpoint first) and whether
    they span ``nodes`` as a single tree.
    """

    def sort_key(e: Edge):
        a, b = sorted((e[0], e[1]), key=key)
        return (e[2], key(a), key(b))

    uf = UnionFind(nodes)
    chosen: list[Edge] = []
    for u, v, w in sorted(edges, key=sort_key):
        if uf.union(u, v):
            a, b = sorted((u, v), key=key)
            chosen.append((a, b, w))
            if len(chosen) == len(nodes) - 1:
                break
    return chosen, len(chosen) == max(len(nodes) - 1, 0)


@dataclass(frozen=True)
class SpanningForest:
    nodes: tuple
    edges: tuple[Edge, ...]
    connected: bool

    @property
    def weight(self) -> float:
        return math.fsum(w for _, _, w in self.edges)

    def rooted(self, root) -> RootedTree:
        if not self.connected:
            raise DisconnectedError("graph is disconnected; only a spanning forest exists")
        return root_tree(self.edges, root, nodes=self.nodes)


def mst(instance: ProblemInstance) -> SpanningForest:
    edges = [(e.u, e.v, e.w) for e in instance.edges]
    chosen, connected = kruskal(instance.ids, edges, instance.order)
    return SpanningForest(instance.ids, tuple(chosen), connected)


def spanning_tree(instance: ProblemInstance, root=None) -> RootedTree:
    """MST over the items, rooted at ``root`` (default: root hint or first item)."""
    return mst(instance).rooted(instance.default_root() if root is None else root)


def root_tree(edges: Iterable[Edge], root, nodes: Optional[Iterable] = None) -> RootedTree:
    edges = list(edges)
    adj: dict[Any, list] = {}
    weights = {}
    for u, v, w in edges:
        adj.setdefault(u, []).append(v)
        adj.setdefault(v, []).append(u)
        weights[frozenset((u, v))] = w
    all_nodes = set(adj) | ({root} if not edges else set())
    if nodes is not None:
        all_nodes |= set(nodes)
    if root not in all_nodes:
        raise ValueError(f"root {root!r} not in tree")
    parent = {}
    seen = {root}
    queue = deque([root])
    while queue:
        node = queue.popleft()
        for nxt in adj.get(node, ()):
            if nxt not in seen:
                seen.add(nxt)
                parent[nxt] = node
                queue.append(nxt)
    if seen != all_nodes or len(edges) != len(all_nodes) - 1:
        raise ValueError("edges do not form a tree")
    return RootedTree(frozenset(all_nodes), root, parent, weights)


def leaves(tree: RootedTree, key: Optional[Callable] = None) -> list:
    """Childless nodes; a childless root counts only when it is the sole node."""
    out = [
        n for n in tree.nodes
        if not tree.children.get(n) and (n != tree.root or len(tree.nodes) == 1)
    ]
    return sorted(out, key=key)


def child_counts(tree: RootedTree) -> dict[Any, int]:
    return {n: len(tree.children.get(n, ())) for n in tree.nodes}


def leaf_depths(tree: RootedTree) -> dict[Any, int]:
    return {n: tree.depth[n] for n in leaves(tree, key=repr)}


@dataclass(frozen=True)
class ClusterLink:
    """Cheapest instance edge (u, v) crossing between two clusters."""

    weight: float
    u: Any
    v: Any


def cluster_graph(
    clusters: Sequence[Cluster], instance: ProblemInstance
) -> dict[tuple[int, int], ClusterLink]:
    """Single-linkage graph over cluster labels, keyed by (smaller label, larger label)."""
    owner = {m: c.label for c in clusters for m in c.members}
    links: dict[tuple[int, int], ClusterLink] = {}
    best: dict[tuple[int, int], tuple] = {}
    for e in instance.edges:
        la, lb = owner.get(e.u), owner.get(e.v)
        if la is None or lb is None or la == lb:
            continue
        u, v = (e.u, e.v) if la < lb else (e.v, e.u)
        key = (e.w, *sorted((instance.order(u), instance.order(v))))
        pair = (min(la, lb), max(la, lb))
        if pair not in best or key < best[pair]:
            best[pair] = key
            links[pair] = ClusterLink(e.w, u, v)
    return links


def cluster_root(clusters: Sequence[Cluster], instance: ProblemInstance) -> int:
    hint = instance.root_hint
    if hint is not None:
        for c in clusters:
            if hint in c.members:
                return c.label
    return min(clusters, key=lambda c: min(instance.order(m) for m in c.members)).label


def cluster_forest(clusters: Sequence[Cluster], instance: ProblemInstance) -> SpanningForest:
    labels = sorted(c.label for c in clusters)
    graph = cluster_graph(clusters, instance)
    edges = [(a, b, link.weight) for (a, b), link in graph.items()]
    chosen, connected = kruskal(labels, edges, key=lambda x: x)
    return SpanningForest(tuple(labels), tuple(chosen), connected)


def mst_over_clusters(
    clusters: Sequence[Cluster] | ClusteringSolution, instance: ProblemInstance
) -> RootedTree:
    if isinstance(clusters, ClusteringSolution):
        clusters = clusters.clusters
    return cluster_forest(clusters, instance).rooted(cluster_root(clusters, instance))


def with_cluster_tree(
    clusters: Sequence[Cluster],
    instance: ProblemInstance,
    trace: Sequence[dict] = (),
    cluster_targets=None,
) -> ClusteringSolution:
    """Wrap clusters into a solution; the cluster tree is None when the cluster graph is disconnected."""
    try:
        tree = mst_over_clusters(clusters, instance)
    except DisconnectedError:
        tree = None
    return ClusteringSolution(tuple(clusters), tree, tuple(trace), cluster_targets)
