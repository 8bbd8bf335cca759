"""Tests for the command-line interface (exit codes, files, determinism)."""

import json
import subprocess
import sys

import pytest

import cliquesched as cs
from cliquesched.cli import main
from cliquesched.pipeline import instance_to_dict
from conftest import golden_instance


@pytest.fixture
def instance_file(tmp_path):
    path = tmp_path / "instance.json"
    cs.save_instance(golden_instance(), path)
    return path


def write_json(path, doc):
    path.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


class TestValidate:
    def test_valid_instance(self, instance_file, capsys):
        assert main(["validate", "--instance", str(instance_file)]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out == {"valid": True, "violations": []}

    def test_invalid_instance(self, tmp_path, capsys):
        doc = instance_to_dict(golden_instance())
        doc["scope"]["exclude"]["hw"] = [0]  # overlaps the include scope
        path = tmp_path / "bad.json"
        write_json(path, doc)
        assert main(["validate", "--instance", str(path)]) == 1
        out = json.loads(capsys.readouterr().out)
        assert not out["valid"]
        assert any("overlap" in line for line in out["violations"])

    def test_unparseable_file(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json", encoding="utf-8")
        assert main(["validate", "--instance", str(path)]) == 1


class TestSolve:
    def test_solves_and_writes(self, instance_file, tmp_path):
        out = tmp_path / "schedule.json"
        rc = main(
            ["solve", "--instance", str(instance_file), "--algorithm", "3.3",
             "--iterations", "2000", "--seed", "7", "--output", str(out)]
        )
        assert rc == 0
        doc = json.loads(out.read_text())
        # serialize/parse renormalization leaves ~1e-32 float dust
        assert abs(doc["cost"]) < 1e-12
        assert sorted(tuple(c["ids"]) for c in doc["configs"]) == [
            (0, 3, 5), (0, 3, 5), (1, 4, 6)
        ]

    def test_budget_required(self, instance_file):
        rc = main(["solve", "--instance", str(instance_file), "--algorithm", "1.1"])
        assert rc == 1

    def test_infeasible_budget_exit_code(self, tmp_path):
        inst = golden_instance()
        doc = instance_to_dict(
            cs.Instance(graph=inst.graph, scope=inst.scope, n=1, target=inst.target)
        )
        path = tmp_path / "tight.json"
        write_json(path, doc)
        rc = main(["solve", "--instance", str(path), "--algorithm", "1.1",
                   "--iterations", "10"])
        assert rc == 2

    def test_checkpoint_chain(self, instance_file, tmp_path):
        ckpt = tmp_path / "state.json"
        out1, out2 = tmp_path / "s1.json", tmp_path / "s2.json"
        assert main(
            ["solve", "--instance", str(instance_file), "--algorithm", "1.2",
             "--iterations", "300", "--seed", "3",
             "--checkpoint-out", str(ckpt), "--output", str(out1)]
        ) == 0
        assert main(
            ["solve", "--instance", str(instance_file), "--algorithm", "1.2",
             "--iterations", "300", "--seed", "3", "--resume", str(ckpt),
             "--checkpoint-out", str(ckpt), "--output", str(out2)]
        ) == 0
        first = json.loads(out1.read_text())
        second = json.loads(out2.read_text())
        assert second["cost"] <= first["cost"]

    def test_wrong_checkpoint_rejected(self, instance_file, tmp_path):
        ckpt = tmp_path / "state.json"
        main(["solve", "--instance", str(instance_file), "--algorithm", "1.1",
              "--iterations", "50", "--checkpoint-out", str(ckpt)])
        rc = main(["solve", "--instance", str(instance_file), "--algorithm", "1.2",
                   "--iterations", "50", "--resume", str(ckpt)])
        assert rc == 1

    def test_byte_identical_reruns(self, instance_file, tmp_path):
        outs = []
        for name in ("a.json", "b.json"):
            path = tmp_path / name
            rc = main(
                ["solve", "--instance", str(instance_file), "--algorithm", "1.5",
                 "--iterations", "500", "--seed", "11", "--output", str(path)]
            )
            assert rc == 0
            outs.append(path.read_bytes())
        assert outs[0] == outs[1]


class TestOracle:
    def test_golden_optimum(self, instance_file, capsys):
        assert main(["oracle", "--instance", str(instance_file)]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert abs(doc["cost"]) < 1e-12
        assert all(doc["coverage_report"].values())

    def test_infeasible_exit_code(self, tmp_path, capsys):
        graph_doc = {"vertices": ["a", "b"], "edges": []}
        gpath = tmp_path / "graph.json"
        write_json(gpath, graph_doc)
        ipath = tmp_path / "reduced.json"
        assert main(["reduce", "--graph", str(gpath), "--n", "1",
                     "--output", str(ipath)]) == 0
        assert main(["oracle", "--instance", str(ipath)]) == 2


class TestReduceAndPack:
    def test_reduce_solve_roundtrip(self, tmp_path, capsys):
        gpath = tmp_path / "graph.json"
        write_json(gpath, {"vertices": ["a", "b", "c"], "edges": [["a", "b"], ["b", "c"]]})
        ipath = tmp_path / "reduced.json"
        assert main(["reduce", "--graph", str(gpath), "--n", "2",
                     "--output", str(ipath)]) == 0
        spath = tmp_path / "sched.json"
        assert main(["solve", "--instance", str(ipath), "--algorithm", "1.1",
                     "--iterations", "100", "--seed", "1", "--output", str(spath)]) == 0
        doc = json.loads(spath.read_text())
        assert doc["cost"] == 0.0
        graph = cs.GeneralGraph.build(["a", "b", "c"], [("a", "b"), ("b", "c")])
        cover = cs.map_back([tuple(c["ids"]) for c in doc["configs"]], graph)
        assert len(cover) <= 2

    def test_pack_adds_groups(self, tmp_path):
        inst = golden_instance()
        packed_inst = cs.Instance(
            graph=inst.graph, scope=inst.scope, n=3, target=inst.target,
            labels=inst.labels,
            packing=cs.PackingTable(vm_dimension=1, capacity={(0, 3): 2}),
        )
        ipath = tmp_path / "inst.json"
        cs.save_instance(packed_inst, ipath)
        spath = tmp_path / "sched.json"
        main(["solve", "--instance", str(ipath), "--algorithm", "3.3",
              "--iterations", "2000", "--seed", "0", "--output", str(spath)])
        ppath = tmp_path / "packed.json"
        assert main(["pack", "--schedule", str(spath), "--instance", str(ipath),
                     "--output", str(ppath)]) == 0
        doc = json.loads(ppath.read_text())
        assert len(doc["node_groups"]) == 3
        copies = sorted(g["copies"] for g in doc["node_groups"])
        assert copies == [1, 2, 2]
        assert len(doc["configs"]) == 5


class TestEntryPoint:
    def test_module_invocation(self, instance_file):
        proc = subprocess.run(
            [sys.executable, "-m", "cliquesched.cli", "validate",
             "--instance", str(instance_file)],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0
        assert json.loads(proc.stdout)["valid"]


class TestWallClockBudget:
    def test_budget_flag_runs(self, instance_file, tmp_path):
        out = tmp_path / "timed.json"
        rc = main(
            ["solve", "--instance", str(instance_file), "--algorithm", "1.1",
             "--budget", "0.1", "--seed", "1", "--output", str(out)]
        )
        assert rc == 0
        doc = json.loads(out.read_text())
        assert all(doc["coverage_report"].values())
