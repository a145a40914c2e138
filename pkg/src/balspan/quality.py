"""Balance and structure quality of clustering solutions, plus Pareto filtering."""

from __future__ import annotations

import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass

from .model import (
    BalspanError,
    ClusteringSolution,
    ItemId,
    ProblemInstance,
    RootedTree,
    StructureEstimate,
    TreeTarget,
    TreeKind,
    UnknownItemError,
)


def structure_estimate(members: Iterable[ItemId], instance: ProblemInstance) -> StructureEstimate:
    """Per-type member counts; entry ``xi - 1`` counts members of type ``xi``."""
    counts = [0] * instance.n_types
    types = instance.type_of
    for m in members:
        try:
            counts[types[m] - 1] += 1
        except KeyError:
            raise UnknownItemError(f"unknown item {m!r}") from None
    return tuple(counts)


def delta(e: Sequence[int], e0: Sequence[int]) -> int:
    """Sum of componentwise absolute differences between two estimates."""
    if len(e) != len(e0):
        raise ValueError(f"estimate lengths differ: {len(e)} != {len(e0)}")
    return sum(abs(a - b) for a, b in zip(e, e0))


def fits_within(e: Sequence[int], e0: Sequence[int]) -> bool:
    return all(a <= b for a, b in zip(e, e0))


def cluster_deltas(solution: ClusteringSolution, instance: ProblemInstance) -> dict[int, int]:
    e0 = instance.target_cluster
    return {
        c.label: delta(structure_estimate(c.members, instance), solution.target_for(c.label, e0))
        for c in solution.clusters
    }


def q_cb(solution: ClusteringSolution, instance: ProblemInstance) -> int:
    if not solution.clusters:
        raise BalspanError("empty solution")
    return max(cluster_deltas(solution, instance).values())


def tree_weight(tree: RootedTree) -> float:
    return math.fsum(tree.edge_weight.values())


def degree_imbalance(tree: RootedTree, k: int) -> int:
    return sum(abs(len(kids) - k) for kids in tree.children.values() if kids)


def height_imbalance(tree: RootedTree, h: int) -> int:
    depth = tree.depth
    leaf_depths = [depth[n] for n in tree.nodes if not tree.children.get(n)]
    return abs(tree.height - h) + (max(leaf_depths) - min(leaf_depths))


def tree_proximity(tree: RootedTree, target: TreeTarget) -> float:
    """Distance of ``tree`` from the required tree shape (0 is ideal).

    MIN_WEIGHT scores the total edge weight; DEGREE(k) sums |children - k| over
    internal nodes; HEIGHT(h) is |height - h| plus the leaf-depth spread.
    """
    if target.kind is TreeKind.MIN_WEIGHT:
        return tree_weight(tree)
    if target.kind is TreeKind.DEGREE:
        return float(degree_imbalance(tree, target.param))
    return float(height_imbalance(tree, target.param))


@dataclass(frozen=True, order=True)
class QualityVector:
    """(Q^cb, Q^s); ``tree_missing`` flags the +inf sentinel for q_s."""

    q_cb: int
    q_s: float
    tree_missing: bool = False

    @property
    def key(self) -> tuple[int, float]:
        return (self.q_cb, self.q_s)

    def dominates(self, other: "QualityVector") -> bool:
        return (
            self.q_cb <= other.q_cb
            and self.q_s <= other.q_s
            and self.key != other.key
        )


def quality_vector(solution: ClusteringSolution, instance: ProblemInstance) -> QualityVector:
    balance = q_cb(solution, instance)
    if solution.cluster_tree is None:
        return QualityVector(balance, math.inf, tree_missing=True)
    return QualityVector(balance, tree_proximity(solution.cluster_tree, instance.target_tree))


def pareto_front(candidates: Sequence[tuple[str, QualityVector]]) -> list[str]:
    """Labels of the non-dominated candidates, ordered by (q_cb, q_s, label)."""
    if not candidates:
        raise ValueError("pareto_front needs at least one candidate")
    front = [
        (q.q_cb, q.q_s, label)
        for label, q in candidates
        if not any(other.dominates(q) for _, other in candidates)
    ]
    return [label for _, _, label in sorted(front)]
