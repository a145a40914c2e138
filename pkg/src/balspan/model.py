"""Domain types: typed items, weighted edges, rooted trees, clusters, solutions."""

from __future__ import annotations

import enum
from collections import defaultdict
from collections.abc import Hashable, Iterable, Mapping
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Optional

ItemId = Hashable
StructureEstimate = tuple[int, ...]


class BalspanError(Exception):
    """Base class for solver errors."""


class UnknownItemError(BalspanError, KeyError):
    pass


class DisconnectedError(BalspanError):
    """Raised when a spanning tree is required but the graph is disconnected."""


class TreeKind(str, enum.Enum):
    MIN_WEIGHT = "min_weight"
    DEGREE = "degree"
    HEIGHT = "height"


@dataclass(frozen=True)
class TreeTarget:
    kind: TreeKind = TreeKind.MIN_WEIGHT
    param: Optional[int] = None


@dataclass(frozen=True)
class Item:
    id: ItemId
    type: int


@dataclass(frozen=True)
class WeightedEdge:
    u: ItemId
    v: ItemId
    w: float

    @property
    def pair(self) -> frozenset:
        return frozenset((self.u, self.v))


@dataclass(frozen=True)
class ProblemInstance:
    """Typed items plus weighted undirected edges and the balance/tree targets.

    ``layers`` maps item id to a layer index (1 = top); ``layer_targets[d-1]``
    is the required structure of clusters in layer ``d``.
    """

    n_types: int
    items: tuple[Item, ...]
    edges: tuple[WeightedEdge, ...]
    target_cluster: StructureEstimate
    target_tree: TreeTarget = TreeTarget()
    root_hint: Optional[ItemId] = None
    layers: Optional[Mapping[ItemId, int]] = None
    layer_targets: Optional[tuple[StructureEstimate, ...]] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "items", tuple(self.items))
        object.__setattr__(self, "edges", tuple(self.edges))
        object.__setattr__(self, "target_cluster", tuple(self.target_cluster))
        if self.layer_targets is not None:
            object.__setattr__(
                self, "layer_targets", tuple(tuple(t) for t in self.layer_targets)
            )
        if self.layers is not None:
            object.__setattr__(self, "layers", dict(self.layers))

    @cached_property
    def ids(self) -> tuple[ItemId, ...]:
        return tuple(item.id for item in self.items)

    @cached_property
    def position(self) -> dict[ItemId, int]:
        pos: dict[ItemId, int] = {}
        for i, item in enumerate(self.items):
            pos.setdefault(item.id, i)
        return pos

    @cached_property
    def type_of(self) -> dict[ItemId, int]:
        types: dict[ItemId, int] = {}
        for item in self.items:
            types.setdefault(item.id, item.type)
        return types

    @cached_property
    def weights(self) -> dict[frozenset, float]:
        return {e.pair: e.w for e in self.edges}

    @cached_property
    def adjacency(self) -> dict[ItemId, dict[ItemId, float]]:
        adj: dict[ItemId, dict[ItemId, float]] = {i: {} for i in self.ids}
        for e in self.edges:
            adj.setdefault(e.u, {})[e.v] = e.w
            adj.setdefault(e.v, {})[e.u] = e.w
        return adj

    def order(self, item_id: ItemId) -> int:
        """Declaration index of ``item_id``; the canonical tie-break key."""
        try:
            return self.position[item_id]
        except KeyError:
            raise UnknownItemError(f"unknown item {item_id!r}") from None

    def sorted_ids(self, ids: Iterable[ItemId]) -> list[ItemId]:
        return sorted(ids, key=self.order)

    def weight(self, u: ItemId, v: ItemId) -> Optional[float]:
        return self.weights.get(frozenset((u, v)))

    def default_root(self) -> ItemId:
        return self.root_hint if self.root_hint is not None else self.items[0].id

    def restricted(
        self, ids: Iterable[ItemId], target: Optional[StructureEstimate] = None
    ) -> "ProblemInstance":
        """Sub-instance induced by ``ids`` (edges with both endpoints kept)."""
        keep = set(ids)
        return ProblemInstance(
            n_types=self.n_types,
            items=tuple(it for it in self.items if it.id in keep),
            edges=tuple(e for e in self.edges if e.u in keep and e.v in keep),
            target_cluster=self.target_cluster if target is None else tuple(target),
            target_tree=self.target_tree,
            root_hint=self.root_hint if self.root_hint in keep else None,
        )


def item_order(instance: ProblemInstance, a: ItemId, b: ItemId) -> int:
    """Three-way comparison of two ids by declaration order (-1, 0, 1)."""
    oa, ob = instance.order(a), instance.order(b)
    return (oa > ob) - (oa < ob)


def validate_instance(instance: ProblemInstance) -> list[str]:
    violations: list[str] = []
    seen: set = set()
    for item in instance.items:
        if item.id in seen:
            violations.append(f"duplicate id {item.id}")
        seen.add(item.id)
        if not isinstance(item.type, int) or not 1 <= item.type <= instance.n_types:
            violations.append(f"type out of range for {item.id}: {item.type}")

    pairs: set = set()
    for e in instance.edges:
        if e.u == e.v:
            violations.append(f"self-loop {e.u}")
            continue
        for end in (e.u, e.v):
            if end not in seen:
                violations.append(f"unknown endpoint {end} in edge {e.u}-{e.v}")
        if e.pair in pairs:
            violations.append(f"duplicate edge {e.u}-{e.v}")
        pairs.add(e.pair)
        if not e.w >= 0:
            violations.append(f"negative weight on edge {e.u}-{e.v}: {e.w}")

    if len(instance.target_cluster) != instance.n_types:
        violations.append(
            f"target_cluster has length {len(instance.target_cluster)}, expected {instance.n_types}"
        )
    if any(c < 0 for c in instance.target_cluster):
        violations.append("target_cluster has a negative entry")

    shape = instance.target_tree
    if shape.kind is not TreeKind.MIN_WEIGHT and (shape.param is None or shape.param < 1):
        violations.append(f"target_tree {shape.kind.value} needs param >= 1")

    if instance.root_hint is not None and instance.root_hint not in seen:
        violations.append(f"unknown root {instance.root_hint}")

    if instance.layers is not None:
        for item in instance.items:
            if item.id not in instance.layers:
                violations.append(f"no layer for {item.id}")
        for key in instance.layers:
            if key not in seen:
                violations.append(f"layer given for unknown item {key}")
        used = sorted(set(instance.layers.values()))
        if used and used != list(range(1, len(used) + 1)):
            violations.append(f"layer indices not contiguous from 1: {used}")
        if instance.layer_targets is not None and used and len(instance.layer_targets) < used[-1]:
            violations.append(
                f"{len(instance.layer_targets)} layer targets for {used[-1]} layers"
            )
    if instance.layer_targets is not None:
        for d, t in enumerate(instance.layer_targets, start=1):
            if len(t) != instance.n_types:
                violations.append(f"layer target {d} has length {len(t)}, expected {instance.n_types}")
    return violations


def _pair(a, b) -> frozenset:
    return frozenset((a, b))


@dataclass(frozen=True)
class RootedTree:
    """Tree with a designated root; ``parent`` maps every non-root node."""

    nodes: frozenset
    root: Any
    parent: Mapping[Any, Any]
    edge_weight: Mapping[frozenset, float]

    @cached_property
    def children(self) -> dict[Any, list]:
        kids: dict[Any, list] = defaultdict(list)
        for child, par in self.parent.items():
            kids[par].append(child)
        return kids

    @cached_property
    def depth(self) -> dict[Any, int]:
        depth = {self.root: 0}
        stack = [self.root]
        while stack:
            node = stack.pop()
            for child in self.children.get(node, ()):
                depth[child] = depth[node] + 1
                stack.append(child)
        return depth

    @property
    def height(self) -> int:
        return max(self.depth.values())

    def weight(self, a, b) -> float:
        return self.edge_weight[_pair(a, b)]

    def edges(self, key=None) -> list[tuple[Any, Any, float]]:
        """(parent, child, weight) triples sorted by child under ``key``."""
        out = [(p, c, self.weight(p, c)) for c, p in self.parent.items()]
        out.sort(key=lambda t: key(t[1]) if key else t[1])
        return out

    def neighbors(self, node) -> list:
        out = list(self.children.get(node, ()))
        if node in self.parent:
            out.append(self.parent[node])
        return out

    def structure_errors(self) -> list[str]:
        errors = []
        if self.root not in self.nodes:
            errors.append("root not in nodes")
        if self.root in self.parent:
            errors.append("root has a parent")
        if len(self.parent) != len(self.nodes) - 1:
            errors.append(f"{len(self.parent)} parent entries for {len(self.nodes)} nodes")
        for child in self.parent:
            seen = set()
            node = child
            while node in self.parent:
                if node in seen:
                    errors.append(f"cycle through {child}")
                    break
                seen.add(node)
                node = self.parent[node]
            else:
                if node != self.root:
                    errors.append(f"{child} does not reach root")
        expected = {_pair(c, p) for c, p in self.parent.items()}
        if set(self.edge_weight) != expected:
            errors.append("edge_weight keys differ from parent-child pairs")
        return errors


@dataclass(frozen=True)
class Cluster:
    label: int
    members: frozenset

    def __post_init__(self) -> None:
        object.__setattr__(self, "members", frozenset(self.members))
        if not self.members:
            raise ValueError(f"cluster {self.label} is empty")


@dataclass(frozen=True)
class ClusteringSolution:
    """Disjoint clusters plus an optional spanning tree over their labels.

    ``cluster_targets`` overrides the instance target structure per label
    (layered solutions judge each layer against its own target).
    """

    clusters: tuple[Cluster, ...]
    cluster_tree: Optional[RootedTree] = None
    trace: tuple[dict, ...] = field(default=(), compare=False)
    cluster_targets: Optional[Mapping[int, StructureEstimate]] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "clusters", tuple(self.clusters))
        object.__setattr__(self, "trace", tuple(self.trace))

    def target_for(self, label: int, default: StructureEstimate) -> StructureEstimate:
        if self.cluster_targets is None:
            return default
        return self.cluster_targets.get(label, default)

    @property
    def labels(self) -> list[int]:
        return [c.label for c in self.clusters]

    def cluster(self, label: int) -> Cluster:
        for c in self.clusters:
            if c.label == label:
                return c
        raise KeyError(label)

    def assignment(self) -> dict[ItemId, int]:
        return {m: c.label for c in self.clusters for m in c.members}


def solution_errors(solution: ClusteringSolution, instance: ProblemInstance) -> list[str]:
    """Disjointness/coverage/label checks for a solver output."""
    errors = []
    labels = solution.labels
    if len(set(labels)) != len(labels):
        errors.append("duplicate cluster labels")
    seen: dict = {}
    for c in solution.clusters:
        for m in c.members:
            if m in seen:
                errors.append(f"{m} in clusters {seen[m]} and {c.label}")
            seen[m] = c.label
    universe = set(instance.ids)
    if set(seen) != universe:
        missing = instance.sorted_ids(universe - set(seen))
        extra = sorted(map(str, set(seen) - universe))
        errors.append(f"coverage mismatch: missing {missing}, unknown {extra}")
    tree = solution.cluster_tree
    if tree is not None:
        if set(tree.nodes) != set(labels):
            errors.append("cluster tree nodes differ from cluster labels")
        errors.extend(tree.structure_errors())
    return errors
