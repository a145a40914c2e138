"""Problem-file parsing and solution emission (JSON and Graphviz DOT)."""

from __future__ import annotations

import json
import math
from importlib import resources
from pathlib import Path
from typing import Any, Optional

from .model import (
    ClusteringSolution,
    Item,
    ProblemInstance,
    TreeTarget,
    TreeKind,
    WeightedEdge,
)
from .quality import delta, quality_vector, structure_estimate
from .spanning import cluster_graph

PALETTE = (
    "#8dd3c7", "#ffffb3", "#bebada", "#fb8072", "#80b1d3", "#fdb462",
    "#b3de69", "#fccde5", "#d9d9d9", "#bc80bd", "#ccebc5", "#ffed6f",
)


class ProblemFormatError(ValueError):
    """The problem document is not well-formed JSON of the expected shape."""


def _int(value: Any, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ProblemFormatError(f"{where}: expected integer, got {value!r}")
    return value


def _int_list(value: Any, where: str) -> tuple[int, ...]:
    if not isinstance(value, list):
        raise ProblemFormatError(f"{where}: expected array of integers")
    return tuple(_int(v, where) for v in value)


def problem_from_dict(doc: Any) -> ProblemInstance:
    if not isinstance(doc, dict):
        raise ProblemFormatError("problem must be a JSON object")
    try:
        n_types = _int(doc["types"], "types")
        items = tuple(
            Item(str(it["id"]), _int(it["type"], f"type of {it['id']}")) for it in doc["items"]
        )
        edges = []
        for e in doc["edges"]:
            w = e["w"]
            if isinstance(w, bool) or not isinstance(w, (int, float)):
                raise ProblemFormatError(f"edge {e['u']}-{e['v']}: weight must be a number")
            edges.append(WeightedEdge(str(e["u"]), str(e["v"]), float(w)))
        target = _int_list(doc["target_cluster"], "target_cluster")
        tt = doc.get("target_tree", {"kind": "min_weight"})
        shape = TreeTarget(TreeKind(tt["kind"]), tt.get("param"))
        layers = doc.get("layers")
        if layers is not None:
            if not isinstance(layers, dict):
                raise ProblemFormatError("layers must be an object mapping id to layer")
            layers = {str(k): _int(v, f"layer of {k}") for k, v in layers.items()}
        layer_targets = doc.get("layer_targets")
        if layer_targets is not None:
            layer_targets = tuple(_int_list(t, "layer_targets") for t in layer_targets)
    except (KeyError, TypeError) as exc:
        raise ProblemFormatError(f"missing or malformed field: {exc}") from None
    except ValueError as exc:
        if isinstance(exc, ProblemFormatError):
            raise
        raise ProblemFormatError(str(exc)) from None
    root = doc.get("root")
    return ProblemInstance(
        n_types=n_types,
        items=items,
        edges=tuple(edges),
        target_cluster=target,
        target_tree=shape,
        root_hint=None if root is None else str(root),
        layers=layers,
        layer_targets=layer_targets,
    )


def load_problem(path: str | Path) -> ProblemInstance:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ProblemFormatError(f"invalid JSON: {exc}") from None
    return problem_from_dict(doc)


def load_paper_fixture() -> ProblemInstance:
    """The bundled 19-item example instance (rooted at a1)."""
    text = resources.files("balspan").joinpath("data/paper_19.json").read_text()
    return problem_from_dict(json.loads(text))


def problem_to_dict(instance: ProblemInstance) -> dict:
    shape = instance.target_tree
    doc: dict[str, Any] = {
        "types": instance.n_types,
        "items": [{"id": it.id, "type": it.type} for it in instance.items],
        "edges": [{"u": e.u, "v": e.v, "w": e.w} for e in instance.edges],
        "target_cluster": list(instance.target_cluster),
        "target_tree": {"kind": shape.kind.value},
    }
    if shape.param is not None:
        doc["target_tree"]["param"] = shape.param
    if instance.root_hint is not None:
        doc["root"] = instance.root_hint
    if instance.layers is not None:
        doc["layers"] = {k: instance.layers[k] for k in instance.sorted_ids(instance.layers)}
    if instance.layer_targets is not None:
        doc["layer_targets"] = [list(t) for t in instance.layer_targets]
    return doc


def solution_to_dict(
    solution: ClusteringSolution, instance: ProblemInstance, strategy: Optional[str] = None
) -> dict:
    qv = quality_vector(solution, instance)
    clusters = []
    for c in sorted(solution.clusters, key=lambda c: c.label):
        est = structure_estimate(c.members, instance)
        clusters.append({
            "label": c.label,
            "members": instance.sorted_ids(c.members),
            "estimate": list(est),
            "delta": delta(est, solution.target_for(c.label, instance.target_cluster)),
        })
    tree = solution.cluster_tree
    tree_doc = None
    if tree is not None:
        tree_doc = {
            "root": tree.root,
            "edges": [
                {"parent": p, "child": c, "weight": w} for p, c, w in tree.edges()
            ],
        }
    doc: dict[str, Any] = {}
    if strategy is not None:
        doc["strategy"] = strategy
    doc.update({
        "clusters": clusters,
        "q_cb": qv.q_cb,
        "q_s": None if math.isinf(qv.q_s) else qv.q_s,
        "q_s_missing_tree": qv.tree_missing,
        "cluster_tree": tree_doc,
        "trace": list(solution.trace),
    })
    return doc


def dumps(doc: Any) -> str:
    return json.dumps(doc, indent=2) + "\n"


def _q(name: Any) -> str:
    return json.dumps(str(name))


def solution_to_dot(solution: ClusteringSolution, instance: ProblemInstance) -> str:
    """Items grouped by cluster; edges realising the cluster tree are drawn bold."""
    lines = ["graph solution {", "  node [style=filled, shape=circle];"]
    owner = {}
    for i, c in enumerate(sorted(solution.clusters, key=lambda c: c.label)):
        est = structure_estimate(c.members, instance)
        colour = PALETTE[i % len(PALETTE)]
        lines.append(f"  subgraph cluster_{c.label} {{")
        lines.append(
            f"    label={_q(f'X{c.label} {tuple(est)} delta={delta(est, solution.target_for(c.label, instance.target_cluster))}')};"
        )
        for m in instance.sorted_ids(c.members):
            owner[m] = c.label
            lines.append(f"    {_q(m)} [fillcolor={_q(colour)}, xlabel={_q(instance.type_of[m])}];")
        lines.append("  }")

    bold = set()
    if solution.cluster_tree is not None:
        links = cluster_graph(solution.clusters, instance)
        for p, c, _ in solution.cluster_tree.edges():
            link = links.get((min(p, c), max(p, c)))
            if link is not None:
                bold.add(frozenset((link.u, link.v)))
    for e in instance.edges:
        attrs = [f"label={_q(e.w)}"]
        if e.pair in bold:
            attrs.append("style=bold, penwidth=3")
        elif owner.get(e.u) != owner.get(e.v):
            attrs.append("style=dashed")
        lines.append(f"  {_q(e.u)} -- {_q(e.v)} [{', '.join(attrs)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
