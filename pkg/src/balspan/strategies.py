"""Top-level solving strategies, local improvement and the Pareto sweep."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

from .model import (
    BalspanError,
    Cluster,
    ClusteringSolution,
    ProblemInstance,
    StructureEstimate,
)
from .quality import QualityVector, fits_within, pareto_front, quality_vector, structure_estimate
from .schemes import CondensingKind, OpCounter, Scheme, attach_separated, run_scheme
from .spanning import (
    cluster_forest,
    cluster_root,
    root_tree,
    spanning_tree,
    with_cluster_tree,
)

log = logging.getLogger(__name__)


def _agglomerate(
    instance: ProblemInstance, e0: StructureEstimate, trace: list[dict]
) -> list[set]:
    """Greedy single-linkage merging restricted to merges that stay within ``e0``.

    Clusters start as singletons; the cheapest crossing edge whose merged
    estimate fits ``e0`` componentwise joins its two clusters. Returns the
    clusters ordered by their earliest-declared member.
    """
    order = instance.order
    owner = {i: i for i in instance.ids}
    members = {i: {i} for i in instance.ids}
    est = {i: list(structure_estimate([i], instance)) for i in instance.ids}
    edges = sorted(
        instance.edges,
        key=lambda e: (e.w, *sorted((order(e.u), order(e.v)))),
    )
    step = 0
    while True:
        chosen = None
        for e in edges:
            a, b = owner[e.u], owner[e.v]
            if a == b:
                continue
            merged = [x + y for x, y in zip(est[a], est[b])]
            if fits_within(merged, e0):
                chosen = (e, a, b, merged)
                break
        if chosen is None:
            break
        e, a, b, merged = chosen
        keep, drop = (a, b) if order(a) < order(b) else (b, a)
        for m in members[drop]:
            owner[m] = keep
        members[keep] |= members.pop(drop)
        est[keep] = merged
        del est[drop]
        step += 1
        trace.append({
            "step": step,
            "action": "merge",
            "edge": instance.sorted_ids((e.u, e.v)),
            "weight": e.w,
            "members": instance.sorted_ids(members[keep]),
            "estimate": merged,
        })
    return [members[k] for k in instance.sorted_ids(members)]


def _labelled(groups: list[set]) -> list[tuple[int, set]]:
    return [(i, g) for i, g in enumerate(groups, start=1)]


def strategy_balance_then_span(instance: ProblemInstance) -> ClusteringSolution:
    """Balanced agglomerative clustering first, then an MST over the clusters."""
    trace: list[dict] = []
    groups = _agglomerate(instance, instance.target_cluster, trace)
    clusters = [Cluster(label, frozenset(g)) for label, g in _labelled(groups)]
    return with_cluster_tree(clusters, instance, trace)


def strategy_spanning_then_balance(
    instance: ProblemInstance,
    kind: CondensingKind | Scheme = Scheme.LEAF_EDGE,
    counter: Optional[OpCounter] = None,
) -> ClusteringSolution:
    """MST over the items, rooted at the root hint, partitioned by a condensing scheme."""
    tree = spanning_tree(instance)
    return run_scheme(tree, kind, instance, counter=counter)


def strategy_direct(instance: ProblemInstance) -> ClusteringSolution:
    """Agglomerative balanced clustering on the instance graph.

    Unlike the balancing-spanning strategy, unbalanced singletons left over
    after merging are joined to their closest non-singleton cluster.
    """
    trace: list[dict] = []
    e0 = instance.target_cluster
    groups = _labelled(_agglomerate(instance, e0, trace))
    leftovers = [
        next(iter(g)) for _, g in groups
        if len(g) == 1 and structure_estimate(g, instance) != e0
    ]
    base = [(label, g) for label, g in groups if len(g) > 1 or next(iter(g)) not in leftovers]
    if base and leftovers:
        base = _labelled([g for _, g in base])
        attached, attach_trace = attach_separated(
            instance.sorted_ids(leftovers), base, instance, first_step=len(trace) + 1
        )
        trace.extend(attach_trace)
        groups = attached
    clusters = [Cluster(label, frozenset(g)) for label, g in groups]
    return with_cluster_tree(clusters, instance, trace)


def resolve_layers(instance: ProblemInstance) -> dict:
    """Layer of every item: explicit ``layers``, else type rank when the layer count equals l."""
    if instance.layer_targets is None:
        raise BalspanError("layered strategy needs layer_targets")
    if instance.layers is not None:
        return dict(instance.layers)
    if len(instance.layer_targets) == instance.n_types:
        return {it.id: it.type for it in instance.items}
    raise BalspanError(
        f"no layers given and {len(instance.layer_targets)} layer targets "
        f"do not match {instance.n_types} types"
    )


def strategy_layered(instance: ProblemInstance) -> ClusteringSolution:
    """Per-layer balanced clustering, then each cluster hangs off the layer above.

    Layer 1 is the top. Clusters in the top layer are joined by an MST;
    every cluster of layer d > 1 is connected to the layer d-1 cluster owning
    the cheapest crossing instance edge, whose endpoints act as cluster heads.
    """
    layer_of = resolve_layers(instance)
    n_layers = max(layer_of.values())
    order = instance.order
    clusters: list[Cluster] = []
    targets: dict[int, StructureEstimate] = {}
    by_layer: dict[int, list[Cluster]] = {}
    trace: list[dict] = []
    owner: dict = {}
    for d in range(1, n_layers + 1):
        ids = [i for i in instance.ids if layer_of[i] == d]
        target = instance.layer_targets[d - 1]
        sub = instance.restricted(ids, target)
        sol = strategy_direct(sub)
        layer_clusters = []
        for c in sorted(sol.clusters, key=lambda c: c.label):
            label = len(clusters) + 1
            cl = Cluster(label, c.members)
            clusters.append(cl)
            layer_clusters.append(cl)
            targets[label] = tuple(target)
            for m in c.members:
                owner[m] = label
        by_layer[d] = layer_clusters
        for rec in sol.trace:
            trace.append({"layer": d, **rec})

    top = by_layer[1]
    top_forest = cluster_forest(top, instance)
    if not top_forest.connected:
        raise BalspanError("top-layer clusters are not connected by instance edges")
    edges = list(top_forest.edges)

    for d in range(2, n_layers + 1):
        upper = {i for i in instance.ids if layer_of[i] == d - 1}
        for c in by_layer[d]:
            best = None
            for m in c.members:
                for nbr, w in instance.adjacency[m].items():
                    if nbr in upper:
                        key = (w, order(m), order(nbr))
                        if best is None or key < best[0]:
                            best = (key, m, nbr)
            if best is None:
                raise BalspanError(
                    f"cluster {c.label} in layer {d} has no edge to layer {d - 1}"
                )
            (w, _, _), head, upper_head = best
            parent = owner[upper_head]
            edges.append((parent, c.label, w))
            trace.append({
                "layer": d,
                "action": "connect",
                "cluster": c.label,
                "parent": parent,
                "heads": [head, upper_head],
                "weight": w,
            })

    root = cluster_root(top, instance)
    tree = root_tree(edges, root, nodes=[c.label for c in clusters])
    return ClusteringSolution(tuple(clusters), tree, tuple(trace), targets)


def _rebuild(
    groups: dict[int, set], instance: ProblemInstance, base: ClusteringSolution
) -> ClusteringSolution:
    clusters = [Cluster(label, frozenset(g)) for label, g in sorted(groups.items())]
    targets = base.cluster_targets
    if targets is not None:
        targets = {label: targets[label] for label in groups if label in targets}
    return with_cluster_tree(clusters, instance, base.trace, targets)


def local_improve(
    solution: ClusteringSolution, instance: ProblemInstance, max_rounds: int = 100
) -> ClusteringSolution:
    """First-improvement hill climbing over single-node reassignments.

    A move is kept only if it strictly lowers (Q^cb, Q^s) lexicographically,
    with the cluster tree recomputed. A cluster emptied by a move is deleted.
    Each accepted move counts as one round.
    """
    if max_rounds < 1:
        raise ValueError("max_rounds must be positive")
    groups = {c.label: set(c.members) for c in solution.clusters}
    current = solution
    best_q = quality_vector(solution, instance).key
    moves: list[dict] = []
    for _ in range(max_rounds):
        accepted = False
        owner = {m: label for label, g in groups.items() for m in g}
        for node in instance.ids:
            src = owner[node]
            for dst in sorted(groups):
                if dst == src:
                    continue
                trial = {label: set(g) for label, g in groups.items()}
                trial[src].discard(node)
                trial[dst].add(node)
                if not trial[src]:
                    del trial[src]
                candidate = _rebuild(trial, instance, solution)
                q = quality_vector(candidate, instance).key
                if q < best_q:
                    groups, current, best_q = trial, candidate, q
                    moves.append({
                        "step": len(moves) + 1,
                        "action": "move",
                        "node": node,
                        "from": src,
                        "to": dst,
                        "q_cb": q[0],
                        "q_s": q[1],
                    })
                    accepted = True
                    break
            if accepted:
                break
        if not accepted:
            break
    if not moves:
        return solution
    return ClusteringSolution(
        current.clusters, current.cluster_tree, solution.trace + tuple(moves), current.cluster_targets
    )


@dataclass(frozen=True)
class Candidate:
    label: str
    solution: Optional[ClusteringSolution]
    quality: Optional[QualityVector]
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass(frozen=True)
class SweepResult:
    candidates: tuple[Candidate, ...]
    front: tuple[str, ...]


def candidate_strategies(instance: ProblemInstance, center_type: int = 1) -> list[tuple[str, object]]:
    runs: list[tuple[str, object]] = [("balance-span", strategy_balance_then_span)]
    for scheme in Scheme:
        kind = CondensingKind(scheme, center_type)
        runs.append((f"span-balance/{scheme.value}",
                     lambda inst, kind=kind: strategy_spanning_then_balance(inst, kind)))
    runs.append(("direct", strategy_direct))
    if instance.layers is not None or instance.layer_targets is not None:
        runs.append(("layered", strategy_layered))
    return runs


def pareto_sweep(
    instance: ProblemInstance, improve: bool = False, center_type: int = 1
) -> SweepResult:
    """Run every strategy, score each, and keep the Pareto-efficient labels.

    A failing strategy is recorded with its error and does not stop the sweep.
    """
    candidates = []
    for label, run in candidate_strategies(instance, center_type):
        try:
            sol = run(instance)
            if improve:
                sol = local_improve(sol, instance)
        except BalspanError as exc:
            log.info("candidate %s failed: %s", label, exc)
            candidates.append(Candidate(label, None, None, str(exc)))
            continue
        candidates.append(Candidate(label, sol, quality_vector(sol, instance)))
    scored = [(c.label, c.quality) for c in candidates if c.ok]
    front = tuple(pareto_front(scored)) if scored else ()
    return SweepResult(tuple(candidates), front)
