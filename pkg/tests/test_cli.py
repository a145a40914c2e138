import json
import os
import subprocess
import sys
from importlib.resources import files

import pydot
import pytest

from balspan.cli import main
from balspan.files import load_problem, problem_from_dict, problem_to_dict

FIXTURE = str(files("balspan") / "data" / "paper_19.json")


def write_problem(path, doc):
    path.write_text(json.dumps(doc))
    return str(path)


def small_doc(types=(1, 2, 3), **extra):
    ids = ["x", "y", "z"]
    doc = {
        "types": 3,
        "items": [{"id": i, "type": t} for i, t in zip(ids, types)],
        "edges": [{"u": "x", "v": "y", "w": 1.0}, {"u": "y", "v": "z", "w": 2.0},
                  {"u": "x", "v": "z", "w": 3.0}],
        "target_cluster": [1, 1, 1],
        "target_tree": {"kind": "min_weight"},
    }
    doc.update(extra)
    return doc


def test_solve_worked_example_leaf(tmp_path, capsys):
    code = main(["solve", FIXTURE, "--strategy", "span-balance", "--scheme", "leaf",
                 "--out-dir", str(tmp_path)])
    assert code == 0
    doc = json.loads((tmp_path / "solution.json").read_text())
    assert doc["q_cb"] == 2
    assert [c["members"] for c in doc["clusters"]][0] == ["a14", "a17", "a18", "a19"]
    assert doc["clusters"][5]["delta"] == 2
    assert doc["cluster_tree"]["root"] == 6
    assert doc["trace"][0]["edge"] == ["a18", "a14"]
    assert (tmp_path / "solution.dot").exists()


def test_malformed_json(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["solve", str(bad), "--strategy", "direct", "--out-dir", str(tmp_path)]) == 1


def test_missing_file(tmp_path):
    assert main(["solve", str(tmp_path / "nope.json"), "--strategy", "direct"]) == 1


def test_invalid_instance(tmp_path, capsys):
    doc = small_doc()
    doc["edges"].append({"u": "x", "v": "x", "w": 1.0})
    code = main(["solve", write_problem(tmp_path / "p.json", doc), "--strategy", "direct",
                 "--out-dir", str(tmp_path)])
    assert code == 2
    assert "self-loop x" in capsys.readouterr().err


def test_layered_without_layers(tmp_path, capsys):
    doc = small_doc(layer_targets=[[1, 1, 1], [1, 1, 1]])
    code = main(["solve", write_problem(tmp_path / "p.json", doc), "--strategy", "layered",
                 "--out-dir", str(tmp_path)])
    assert code == 2
    assert "layer targets" in capsys.readouterr().err


def test_solver_error_exit(tmp_path):
    doc = small_doc()
    doc["edges"] = [{"u": "x", "v": "y", "w": 1.0}]
    code = main(["solve", write_problem(tmp_path / "p.json", doc), "--strategy", "span-balance",
                 "--scheme", "leaf", "--out-dir", str(tmp_path)])
    assert code == 3


def test_scheme_flag_required():
    with pytest.raises(SystemExit) as exc:
        main(["solve", FIXTURE, "--strategy", "span-balance"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit):
        main(["solve", FIXTURE, "--strategy", "direct", "--scheme", "leaf"])


def test_sweep_worked_example(tmp_path):
    assert main(["sweep", FIXTURE, "--out-dir", str(tmp_path)]) == 0
    doc = json.loads((tmp_path / "sweep.json").read_text())
    assert len(doc["candidates"]) >= 6
    assert doc["front"] == ["span-balance/root"]
    for row in doc["candidates"]:
        assert (tmp_path / row["file"]).exists()


def test_sweep_trivial(tmp_path):
    assert main(["sweep", write_problem(tmp_path / "p.json", small_doc()),
                 "--out-dir", str(tmp_path)]) == 0
    doc = json.loads((tmp_path / "sweep.json").read_text())
    assert {(r["q_cb"], r["q_s"]) for r in doc["candidates"]} == {(0, 0)}


def test_sweep_center_failure(tmp_path):
    path = write_problem(tmp_path / "p.json", small_doc(types=(2, 3, 2)))
    assert main(["sweep", path, "--out-dir", str(tmp_path)]) == 0
    doc = json.loads((tmp_path / "sweep.json").read_text())
    failed = [r["label"] for r in doc["candidates"] if not r["ok"]]
    assert failed == ["span-balance/center"]


def test_verify_worked_example_trace(capsys):
    assert main(["verify", FIXTURE, "--paper-trace"]) == 0
    assert "trace: MATCH" in capsys.readouterr().out


def test_verify_guard(tmp_path):
    doc = {
        "types": 3,
        "items": [{"id": f"n{i}", "type": i % 3 + 1} for i in range(50)],
        "edges": [{"u": f"n{i}", "v": f"n{i + 1}", "w": 1.0} for i in range(49)],
        "target_cluster": [1, 1, 1],
        "target_tree": {"kind": "min_weight"},
    }
    assert main(["verify", write_problem(tmp_path / "big.json", doc)]) == 4


def test_verify_small(tmp_path, capsys):
    doc = small_doc()
    doc["items"] += [{"id": "u", "type": 1}, {"id": "v", "type": 2}, {"id": "w", "type": 1}]
    doc["edges"] += [{"u": "z", "v": "u", "w": 0.7}, {"u": "u", "v": "v", "w": 1.9},
                     {"u": "v", "v": "w", "w": 0.4}, {"u": "x", "v": "w", "w": 2.6}]
    assert main(["verify", write_problem(tmp_path / "p.json", doc)]) == 0
    out = capsys.readouterr().out
    assert "-> ok" in out and "FAIL" not in out
    assert "oracle best q_cb" in out


def test_problem_round_trip(example):
    again = problem_from_dict(json.loads(json.dumps(problem_to_dict(example))))
    assert again == example
    assert {e.w for e in again.edges} == {e.w for e in load_problem(FIXTURE).edges}


def test_dot_parses(tmp_path):
    main(["solve", FIXTURE, "--strategy", "span-balance", "--scheme", "leaf",
          "--out", "dot", "--out-dir", str(tmp_path)])
    graphs = pydot.graph_from_dot_data((tmp_path / "solution.dot").read_text())
    assert graphs and len(graphs[0].get_subgraphs()) == 6
    bold = [e for e in graphs[0].get_edges() if "bold" in str(e.get("style"))]
    assert len(bold) == 5


def test_output_byte_identical_across_hash_seeds(tmp_path):
    outputs = []
    for seed in ("1", "2"):
        out = tmp_path / seed
        env = dict(os.environ, PYTHONHASHSEED=seed)
        subprocess.run(
            [sys.executable, "-m", "balspan", "solve", FIXTURE, "--strategy", "span-balance",
             "--scheme", "root", "--out-dir", str(out)],
            check=True, env=env, capture_output=True,
        )
        outputs.append(((out / "solution.json").read_bytes(), (out / "solution.dot").read_bytes()))
    assert outputs[0] == outputs[1]
