"""Command-line behaviour: exit codes and written artifacts."""

import json

import pytest

from popgraph.exporters import export_script
from popgraph.interactive import should_use_interactive_mode
from popgraph.main import main, parse_range


def exit_code(argv: list[str]) -> int:
    with pytest.raises(SystemExit) as excinfo:
        main(argv)
    return excinfo.value.code


class TestRun:
    def test_converged(self, tmp_path):
        out = tmp_path / "run.json"
        assert exit_code(["run", "--protocol", "tree-id", "--graph", "tree:6:1", "--scheduler", "random:4",
                          "--out", str(out)]) == 0
        data = json.loads(out.read_text())
        assert data["verdict"] == "converged(yes)"
        assert data["scheduler"] == "random:4"
        assert len(data["steps"]) == data["step_count"]

    def test_replay_of_written_trace(self, tmp_path):
        out = tmp_path / "run.json"
        exit_code(["run", "--protocol", "star-id", "--graph", "star:5", "--scheduler", "rr", "--window", "500",
                   "--out", str(out)])
        assert exit_code(["replay", "--trace", str(out)]) == 0

    def test_tampered_trace_diverges(self, tmp_path):
        out = tmp_path / "run.json"
        exit_code(["run", "--protocol", "tree-id", "--graph", "ring:4", "--max-steps", "300", "--window", "300",
                   "--out", str(out)])
        data = json.loads(out.read_text())
        data["steps"][5]["after"][str(data["steps"][5]["init"])] = 17
        data["steps"][5]["after"][str(data["steps"][5]["resp"])] = 17
        out.write_text(json.dumps(data))
        assert exit_code(["replay", "--trace", str(out)]) == 4

    def test_script_that_runs_dry_is_not_converged(self, tmp_path):
        script = tmp_path / "script.json"
        export_script([(0, 1), (1, 2)], script)
        assert exit_code(["run", "--protocol", "tree-id", "--graph", "line:3",
                          "--scheduler", f"script:{script}"]) == 2

    def test_script_with_non_edge(self, tmp_path):
        script = tmp_path / "script.json"
        export_script([(0, 2)], script)
        assert exit_code(["run", "--protocol", "tree-id", "--graph", "line:3",
                          "--scheduler", f"script:{script}"]) == 1

    @pytest.mark.parametrize("argv", [
        ["run", "--protocol", "bogus", "--graph", "ring:3"],
        ["run", "--protocol", "tree-id", "--graph", "ring:2"],
        ["run", "--protocol", "tree-id", "--graph", "ring:4", "--max-steps", "10", "--window", "20"],
        ["run", "--graph", "ring:3"],
        ["frobnicate"],
    ])
    def test_usage_errors(self, argv):
        assert exit_code(argv) == 1

    def test_bad_environment(self, monkeypatch):
        monkeypatch.setenv("POPGRAPH_MAX_STEPS", "many")
        assert exit_code(["run", "--protocol", "tree-id", "--graph", "line:3"]) == 1


class TestCheckStable:
    def test_matches_oracle(self, tmp_path):
        out = tmp_path / "report.json"
        assert exit_code(["check-stable", "--protocol", "tree-id", "--graph", "ring:3", "--out", str(out)]) == 0
        report = json.loads(out.read_text())
        assert report["verdict"] == "all-no-stable"
        assert report["expected"] == "no"

    def test_cap_exceeded(self):
        assert exit_code(["check-stable", "--protocol", "tree-id", "--graph", "ring:4", "--cap", "5"]) == 3


class TestImpossibility:
    def test_weak_double(self, tmp_path):
        out = tmp_path / "double.json"
        assert exit_code(["impossibility", "weak-double", "--out", str(out)]) == 0
        report = json.loads(out.read_text())
        assert report["passed"]
        assert (report["mu"], report["lam"]) == (2, 1)

    def test_line_ring(self):
        assert exit_code(["impossibility", "line-ring", "--protocol", "star-id"]) == 0

    def test_period_budget_from_environment(self, monkeypatch):
        monkeypatch.setenv("POPGRAPH_PIVOT_BUDGET", "1")
        assert exit_code(["impossibility", "weak-double"]) == 3

    def test_arbitrary_init(self, tmp_path):
        out = tmp_path / "edge.json"
        assert exit_code(["impossibility", "arbitrary-init", "--protocol", "star-id", "--graph", "star:4+add:1-2",
                          "--edge", "1-2", "--out", str(out)]) == 0
        assert json.loads(out.read_text())["reduced"] == "star:4+add:1-2+del:1-2"

    def test_bad_edge(self):
        assert exit_code(["impossibility", "arbitrary-init", "--edge", "0to1"]) == 1

    def test_doubled_script_replays(self, tmp_path):
        script, out = tmp_path / "double.json", tmp_path / "run.json"
        assert exit_code(["impossibility", "weak-double", "--segments", "20", "--script-out", str(script)]) == 0
        graph = tmp_path / "double.graph.txt"
        assert graph.read_bytes().startswith(b"6 ")
        assert exit_code(["run", "--protocol", "tree-id", "--graph", f"file:{graph}",
                          "--scheduler", f"script:{script}", "--out", str(out)]) == 2
        data = json.loads(out.read_text())
        assert data["verdict"] == "end-of-script"
        assert data["step_count"] == len(json.loads(script.read_text()))
        # every agent still answers yes on the cyclic doubled graph
        assert all(state % 2 == 0 for state in data["final"])

    def test_line_ring_script_replays_on_ring(self, tmp_path):
        script = tmp_path / "pumped.json"
        assert exit_code(["impossibility", "line-ring", "--script-out", str(script)]) == 0
        assert (tmp_path / "pumped.graph.txt").read_bytes() == b"4 4\n0 1\n0 3\n1 2\n2 3\n"
        assert exit_code(["run", "--protocol", "tree-id", "--graph", "ring:4",
                          "--scheduler", f"script:{script}"]) == 2

    def test_arbitrary_init_script_reproduces_base_run(self, tmp_path):
        script, out = tmp_path / "base.json", tmp_path / "run.json"
        assert exit_code(["impossibility", "arbitrary-init", "--graph", "ring:4", "--edge", "0-1",
                          "--script-out", str(script)]) == 0
        assert exit_code(["run", "--protocol", "tree-id", "--graph", "ring:4",
                          "--scheduler", f"script:{script}", "--out", str(out)]) == 0
        assert json.loads(out.read_text())["verdict"] == "converged(no)"


class TestSweep:
    def test_tree_family(self, tmp_path):
        out, md = tmp_path / "sweep.csv", tmp_path / "sweep.md"
        assert exit_code(["sweep", "--protocol", "tree-id", "--family", "tree", "--sizes", "3..5", "--seeds", "2",
                          "--out", str(out), "--markdown", str(md)]) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "family,n,seed,verdict,steps"
        assert len(lines) == 7
        assert md.read_text().startswith("# Sweep: `tree-id`")

    def test_bad_scheduler(self):
        assert exit_code(["sweep", "--protocol", "tree-id", "--family", "tree", "--sizes", "3",
                          "--scheduler", "script:x.json"]) == 1


class TestGenGraph:
    def test_writes_edge_list(self, tmp_path):
        out = tmp_path / "ring.txt"
        assert exit_code(["gen-graph", "--graph", "ring:4", "--out", str(out)]) == 0
        assert out.read_bytes() == b"4 4\n0 1\n0 3\n1 2\n2 3\n"

    def test_stdout(self, capsys):
        assert exit_code(["gen-graph", "--graph", "line:3"]) == 0
        assert capsys.readouterr().out == "3 2\n0 1\n1 2\n"


def test_parse_range():
    assert parse_range("2..5") == [2, 3, 4, 5]
    assert parse_range("3,5,8") == [3, 5, 8]
    assert parse_range("7") == [7]


def test_interactive_mode_trigger():
    assert should_use_interactive_mode([])
    assert should_use_interactive_mode(["-i"])
    assert not should_use_interactive_mode(["run", "--protocol", "tree-id"])
