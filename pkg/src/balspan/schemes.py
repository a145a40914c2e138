"""Condensing-point partitioning of a rooted spanning tree into balanced clusters.

Each scheme repeatedly picks a condensing edge in the remaining forest, merges
its endpoints into a seed, grows the seed with tree neighbours whose types
are still missing from the target structure, and deletes the resulting
cluster from the forest. Nodes left without tree edges are parked and later
joined to their closest cluster.
"""

from __future__ import annotations

import enum
from collections import deque
from collections.abc import Iterable
from dataclasses import dataclass
from typing import Any, Optional

from .model import (
    BalspanError,
    Cluster,
    ClusteringSolution,
    ProblemInstance,
    RootedTree,
    StructureEstimate,
)
from .quality import fits_within, structure_estimate
from .spanning import with_cluster_tree


class Scheme(str, enum.Enum):
    MIN_EDGE = "edge"
    LEAF_EDGE = "leaf"
    ROOT_EDGE = "root"
    CENTER = "center"


@dataclass(frozen=True)
class CondensingKind:
    scheme: Scheme
    center_type: int = 1

    @property
    def label(self) -> str:
        if self.scheme is Scheme.CENTER:
            return f"{self.scheme.value}[{self.center_type}]"
        return self.scheme.value


class OpCounter:
    """Counts basic node/edge inspections made by a scheme run."""

    def __init__(self) -> None:
        self.count = 0

    def tick(self, n: int = 1) -> None:
        self.count += n


def _tree_adjacency(tree: RootedTree) -> dict[Any, dict[Any, float]]:
    adj: dict[Any, dict[Any, float]] = {n: {} for n in tree.nodes}
    for child, par in tree.parent.items():
        w = tree.weight(child, par)
        adj[child][par] = w
        adj[par][child] = w
    return adj


def _grow(
    seed: Iterable,
    adj: dict[Any, dict[Any, float]],
    alive: set,
    e0: StructureEstimate,
    instance: ProblemInstance,
    ops: OpCounter,
) -> tuple[set, list]:
    members = set(seed)
    est = list(structure_estimate(members, instance))
    typ = instance.type_of
    added = []
    while any(a < b for a, b in zip(est, e0)):
        best = None
        for m in members:
            for nbr, w in adj[m].items():
                ops.tick()
                if nbr in members or nbr not in alive:
                    continue
                t = typ[nbr] - 1
                if est[t] >= e0[t]:
                    continue
                key = (w, instance.order(nbr))
                if best is None or key < best[0]:
                    best = (key, nbr)
        if best is None:
            break
        nbr = best[1]
        members.add(nbr)
        est[typ[nbr] - 1] += 1
        added.append(nbr)
    return members, added


def grow_cluster(
    seed: Iterable,
    tree: RootedTree,
    e0: StructureEstimate,
    instance: ProblemInstance,
    label: int = 1,
) -> Cluster:
    """Grow ``seed`` along ``tree`` until it matches ``e0`` or no neighbour fills a gap.

    Among neighbours whose type is still deficient, the one with the cheapest
    connecting tree edge is added first (ties by declaration order).
    """
    seed = set(seed)
    if not seed:
        raise ValueError("empty seed")
    members, _ = _grow(seed, _tree_adjacency(tree), set(tree.nodes), tuple(e0), instance, OpCounter())
    return Cluster(label, frozenset(members))


def _components(alive: set, adj, instance: ProblemInstance, ops: OpCounter) -> list[list]:
    seen: set = set()
    comps = []
    for start in instance.sorted_ids(alive):
        if start in seen:
            continue
        seen.add(start)
        comp = [start]
        queue = deque([start])
        while queue:
            node = queue.popleft()
            for nbr in adj[node]:
                ops.tick()
                if nbr in alive and nbr not in seen:
                    seen.add(nbr)
                    comp.append(nbr)
                    queue.append(nbr)
        comps.append(comp)
    return comps


def _orient(comp: list, root, adj, alive: set, ops: OpCounter) -> dict:
    parent = {root: None}
    queue = deque([root])
    while queue:
        node = queue.popleft()
        for nbr in adj[node]:
            ops.tick()
            if nbr in alive and nbr not in parent:
                parent[nbr] = node
                queue.append(nbr)
    return parent


def run_scheme(
    tree: RootedTree,
    kind: CondensingKind | Scheme,
    instance: ProblemInstance,
    counter: Optional[OpCounter] = None,
) -> ClusteringSolution:
    """Partition ``tree`` into clusters shaped like ``instance.target_cluster``.

    The returned solution carries a step-by-step trace and a cluster tree
    built over single-linkage distances between clusters.
    """
    if isinstance(kind, Scheme):
        kind = CondensingKind(kind)
    if set(tree.nodes) != set(instance.ids):
        raise BalspanError("tree does not span the instance items")
    ops = counter if counter is not None else OpCounter()
    e0 = instance.target_cluster
    typ = instance.type_of
    order = instance.order
    adj = _tree_adjacency(tree)
    depth = tree.depth
    alive = set(tree.nodes)
    stamp = {tree.root: 0}

    centers: set = set()
    if kind.scheme is Scheme.CENTER:
        centers = {n for n in alive if typ[n] == kind.center_type}
        if not centers:
            raise BalspanError(f"no items of center type {kind.center_type}")

    clusters: list[tuple[int, set]] = []
    trace: list[dict] = []
    separated: list = []

    def comp_root(comp: list):
        if kind.scheme is Scheme.ROOT_EDGE:
            return max((n for n in comp if n in stamp), key=lambda n: stamp[n])
        return min(comp, key=lambda n: (depth[n], order(n)))

    step = 0
    while alive:
        comps = _components(alive, adj, instance, ops)
        for comp in comps:
            if len(comp) == 1:
                separated.append(comp[0])
                alive.discard(comp[0])
        comps = [c for c in comps if len(c) > 1]
        if not comps:
            break

        best = None
        for comp in comps:
            root = comp_root(comp)
            parent = _orient(comp, root, adj, alive, ops)
            if kind.scheme is Scheme.MIN_EDGE:
                cands = [(c, p) for c, p in parent.items() if p is not None]
            elif kind.scheme is Scheme.LEAF_EDGE:
                has_child = {p for p in parent.values() if p is not None}
                cands = [(n, parent[n]) for n in comp if n != root and n not in has_child]
            elif kind.scheme is Scheme.ROOT_EDGE:
                cands = [(root, n) for n in comp if parent[n] == root]
            else:
                cands = [
                    (c, nbr) for c in comp if c in centers
                    for nbr in adj[c] if nbr in alive
                ]
            for a, b in cands:
                ops.tick()
                if kind.scheme is Scheme.MIN_EDGE and order(a) > order(b):
                    a, b = b, a
                w = adj[a][b]
                key = (w, typ[a] == typ[b], min(order(a), order(b)), max(order(a), order(b)), order(a))
                if best is None or key < best[0]:
                    best = (key, a, b, comp)
        if best is None:
            # only center-free components remain
            for n in instance.sorted_ids(alive):
                separated.append(n)
            alive.clear()
            break

        _, a, b, comp = best
        step += 1
        seed = {a, b}
        comp_est = structure_estimate(comp, instance)
        forced = not all(x >= y for x, y in zip(comp_est, e0))
        if forced:
            members = set(comp)
            added = instance.sorted_ids(members - seed)
        else:
            members, added = _grow(seed, adj, alive, e0, instance, ops)
        label = len(clusters) + 1
        clusters.append((label, members))
        alive -= members

        cut_off = []
        for m in members:
            for nbr in adj[m]:
                ops.tick()
                if nbr in alive:
                    stamp[nbr] = step
                    if not any(x in alive for x in adj[nbr]):
                        cut_off.append(nbr)
        for n in cut_off:
            alive.discard(n)
        separated.extend(cut_off)

        trace.append({
            "step": step,
            "action": "condense",
            "scheme": kind.scheme.value,
            "edge": [a, b],
            "weight": adj[a][b],
            "seed": instance.sorted_ids(seed),
            "seed_overflow": not fits_within(structure_estimate(seed, instance), e0),
            "added": list(added),
            "forced": forced,
            "cluster": label,
            "members": instance.sorted_ids(members),
            "estimate": list(structure_estimate(members, instance)),
            "separated": instance.sorted_ids(cut_off),
            "remaining": len(alive),
        })

    clusters, attach_trace = attach_separated(
        instance.sorted_ids(separated), clusters, instance, ops, first_step=step + 1
    )
    trace.extend(attach_trace)
    final = [Cluster(label, frozenset(m)) for label, m in clusters]
    return with_cluster_tree(final, instance, trace)


def attach_separated(
    nodes: list,
    clusters: list[tuple[int, set]],
    instance: ProblemInstance,
    ops: Optional[OpCounter] = None,
    first_step: int = 1,
) -> tuple[list[tuple[int, set]], list[dict]]:
    """Join each node (in the given order) to the cluster with the cheapest instance edge to it.

    Ties go to the earlier-declared member, then the smaller label; a node with
    no edge into any cluster joins the smallest label. With no clusters at all
    the node opens a new one.
    """
    ops = ops if ops is not None else OpCounter()
    clusters = [(label, set(m)) for label, m in clusters]
    owner = {m: i for i, (_, ms) in enumerate(clusters) for m in ms}
    trace = []
    step = first_step
    for node in nodes:
        best = None
        for nbr, w in instance.adjacency.get(node, {}).items():
            ops.tick()
            if nbr in owner:
                idx = owner[nbr]
                key = (w, instance.order(nbr), clusters[idx][0])
                if best is None or key < best[0]:
                    best = (key, idx)
        if best is not None:
            idx, weight = best[1], best[0][0]
        elif clusters:
            idx = min(range(len(clusters)), key=lambda i: clusters[i][0])
            weight = None
        else:
            label = 1
            clusters.append((label, {node}))
            owner[node] = 0
            trace.append({
                "step": step, "action": "open", "node": node, "cluster": label,
                "weight": None, "members": [node],
                "estimate": list(structure_estimate([node], instance)),
            })
            step += 1
            continue
        label, members = clusters[idx]
        members.add(node)
        owner[node] = idx
        trace.append({
            "step": step,
            "action": "attach",
            "node": node,
            "cluster": label,
            "weight": weight,
            "members": instance.sorted_ids(members),
            "estimate": list(structure_estimate(members, instance)),
        })
        step += 1
    return clusters, trace
