"""One test per acceptance criterion; each records a PASS/FAIL line for the terminal summary."""

import random
import statistics
import time
from importlib.resources import files

from balspan.cli import main
from balspan.files import dumps, solution_to_dict
from balspan.model import BalspanError, Cluster, solution_errors
from balspan.oracle import PUBLISHED_ASSIGNMENT, best_qcb, enumerate_spanning_trees, replay_paper_trace
from balspan.quality import QualityVector, delta, pareto_front, q_cb, quality_vector
from balspan.schemes import CondensingKind, OpCounter, Scheme, run_scheme
from balspan.spanning import mst, spanning_tree, with_cluster_tree
from balspan.strategies import candidate_strategies, local_improve, strategy_spanning_then_balance
from instances import random_connected

FIXTURE = str(files("balspan") / "data" / "paper_19.json")


def test_criterion_1_worked_example_trace(example, capsys, record_criterion):
    start = time.perf_counter()
    code = main(["verify", FIXTURE, "--paper-trace"])
    elapsed = time.perf_counter() - start
    out = capsys.readouterr().out
    sol = strategy_spanning_then_balance(example, CondensingKind(Scheme.LEAF_EDGE))
    condense = [r for r in sol.trace if r["action"] == "condense"]
    estimates = {r["cluster"]: tuple(r["estimate"]) for r in sol.trace}
    report = replay_paper_trace()
    passed = (
        code == 0 and "trace: MATCH" in out and report.match
        and [r["weight"] for r in condense] == [0.5, 0.6, 1.0, 1.1, 1.2, 2.5]
        and estimates[6] == (2, 1, 0) and estimates[1] == (1, 1, 2)
        and q_cb(sol, example) == 2 and elapsed < 1.0
    )
    record_criterion(1, "example trace reproduction", passed, f"{elapsed:.3f} s")
    assert passed, report.diffs


def test_criterion_2_assignment_table(example, record_criterion):
    sol = strategy_spanning_then_balance(example, CondensingKind(Scheme.LEAF_EDGE))
    got = sol.assignment()
    passed = got == PUBLISHED_ASSIGNMENT and len(got) == 19
    record_criterion(2, "cluster assignment table", passed)
    assert passed


def test_criterion_3_delta_examples(record_criterion):
    values = (delta((2, 1, 0), (1, 1, 1)), delta((1, 1, 2), (1, 1, 1)))
    passed = values == (2, 1) and max(values) == 2
    record_criterion(3, "delta examples", passed, f"{values}")
    assert passed


def test_criterion_4_mst_optimality(record_criterion):
    rng = random.Random(4)
    start = time.perf_counter()
    mismatches = 0
    for _ in range(100):
        inst = random_connected(rng, rng.randint(2, 8))
        if mst(inst).weight != enumerate_spanning_trees(inst).min_weight:
            mismatches += 1
    elapsed = time.perf_counter() - start
    passed = mismatches == 0 and elapsed < 10
    record_criterion(4, "MST optimality on 100 instances", passed,
                     f"{mismatches} mismatches, {elapsed:.2f} s")
    assert passed


def test_criterion_5_heuristics_never_beat_oracle(record_criterion):
    rng = random.Random(5)
    start = time.perf_counter()
    violations, gaps = [], {}
    for k in range(100):
        inst = random_connected(rng, rng.randint(3, 8))
        optimum, _ = best_qcb(inst)
        for label, run in candidate_strategies(inst):
            try:
                value = q_cb(run(inst), inst)
            except BalspanError:
                continue
            gaps.setdefault(label, []).append(value - optimum)
            if value < optimum:
                violations.append((k, label))
    elapsed = time.perf_counter() - start
    mean_gap = statistics.mean(g for v in gaps.values() for g in v)
    per = ", ".join(f"{label} {statistics.mean(v):.2f}" for label, v in sorted(gaps.items()))
    passed = not violations and elapsed < 60
    record_criterion(5, "heuristic Q^cb >= oracle optimum", passed,
                     f"mean gap {mean_gap:.2f} [{per}], {elapsed:.1f} s")
    assert passed, violations


def test_criterion_6_quadratic_operation_counts(record_criterion):
    sizes = (50, 100, 200, 400)
    drifts = {}
    for scheme in Scheme:
        ratios = []
        for n in sizes:
            inst = random_connected(random.Random(6000 + n), n, tree_only=True)
            counter = OpCounter()
            run_scheme(spanning_tree(inst), CondensingKind(scheme), inst, counter)
            ratios.append(counter.count / n ** 2)
        drifts[scheme.value] = max(ratios) / min(ratios)
    passed = all(d < 4 for d in drifts.values())
    detail = ", ".join(f"{k} drift {v:.2f}x" for k, v in drifts.items())
    record_criterion(6, "operation count fits c*n^2", passed, detail)
    assert passed


def _delta_axioms(rng):
    for _ in range(1000):
        x, y, z = ([rng.randint(0, 9) for _ in range(4)] for _ in range(3))
        if delta(x, x) != 0 or delta(x, y) != delta(y, x) or delta(x, y) < 0:
            return False
        if delta(x, z) > delta(x, y) + delta(y, z) or (delta(x, y) == 0) != (x == y):
            return False
    return True


def _pareto_sets(rng):
    for _ in range(200):
        pts = [(rng.randint(0, 6), float(rng.randint(0, 6))) for _ in range(rng.randint(1, 15))]
        cands = [(f"c{i:02d}", QualityVector(a, b)) for i, (a, b) in enumerate(pts)]
        expected = {
            f"c{i:02d}" for i, p in enumerate(pts)
            if not any(q[0] <= p[0] and q[1] <= p[1] and q != p for q in pts)
        }
        if set(pareto_front(cands)) != expected:
            return False
    return True


def _solver_outputs(rng, example):
    instances = [example] + [random_connected(rng, rng.randint(3, 20)) for _ in range(30)]
    bad, runs = 0, 0
    for inst in instances:
        for label, run in candidate_strategies(inst):
            try:
                first = run(inst)
            except BalspanError:
                continue
            runs += 1
            again = run(inst)
            if solution_errors(first, inst):
                bad += 1
            elif dumps(solution_to_dict(first, inst, label)) != dumps(solution_to_dict(again, inst, label)):
                bad += 1
    return bad, runs


def test_criterion_7_invariant_suite(example, record_criterion):
    rng = random.Random(7)
    metric_ok = _delta_axioms(rng)
    pareto_ok = _pareto_sets(rng)
    bad, runs = _solver_outputs(rng, example)
    passed = metric_ok and pareto_ok and bad == 0
    record_criterion(7, "invariant suite", passed,
                     f"metric {metric_ok}, pareto {pareto_ok}, {runs - bad}/{runs} solver runs clean")
    assert passed


def test_criterion_8_local_improve_monotone(record_criterion):
    rng = random.Random(8)
    worse = 0
    for _ in range(100):
        inst = random_connected(rng, rng.randint(3, 10))
        label, run = candidate_strategies(inst)[rng.randrange(6)]
        try:
            sol = run(inst)
        except BalspanError:
            sol = candidate_strategies(inst)[0][1](inst)
        if quality_vector(local_improve(sol, inst), inst).key > quality_vector(sol, inst).key:
            worse += 1
    passed = worse == 0
    record_criterion(8, "local_improve never worsens quality on 100 instances", passed)
    assert passed


def test_criterion_8_perturbed_worked_example_restores_two(example, record_criterion):
    moved = dict(PUBLISHED_ASSIGNMENT, a19=6)
    groups = {}
    for item, label in moved.items():
        groups.setdefault(label, set()).add(item)
    perturbed = with_cluster_tree([Cluster(k, frozenset(v)) for k, v in sorted(groups.items())], example)
    before = q_cb(perturbed, example)
    after = q_cb(local_improve(perturbed, example), example)
    passed = after == 2
    record_criterion(8, "perturbed example solution restored to Q^cb = 2", passed,
                     f"Q^cb before {before}, after {after}")
    assert after == 2
