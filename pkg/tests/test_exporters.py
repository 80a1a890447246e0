"""JSON, CSV and Markdown output."""

import json

import pytest

from popgraph.engine import run
from popgraph.errors import SpecError
from popgraph.exporters import (export_report, export_sweep_csv, export_sweep_markdown, export_trace, load_trace,
                                sweep_csv_text)
from popgraph.schedulers import RoundRobinScheduler
from popgraph.stats import SweepRecord, aggregate_sweep


@pytest.fixture
def records():
    return [
        SweepRecord("tree", 4, 0, "converged(yes)", 150, expected="yes"),
        SweepRecord("treechord", 4, 0, "converged(yes)", 90, expected="no"),
    ]


def test_trace_json_is_stable(tmp_path, ti, line3):
    trace = run(ti, line3, RoundRobinScheduler(), max_steps=12, window=12)
    first, second = tmp_path / "a.json", tmp_path / "b.json"
    export_trace(trace, first)
    export_trace(trace, second)
    assert first.read_bytes() == second.read_bytes()
    text = first.read_text()
    assert text.startswith('{"final":')
    assert ", " not in text
    loaded = load_trace(first)
    assert loaded.steps == trace.steps
    assert loaded.verdict == trace.verdict


def test_report_keys_are_sorted(tmp_path):
    path = tmp_path / "report.json"
    export_report({"verdict": "mixed", "graph": "ring:3"}, path)
    assert path.read_text() == '{"graph":"ring:3","verdict":"mixed"}\n'


def test_load_trace_rejects_garbage(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"protocol": "tree-id"}))
    with pytest.raises(SpecError):
        load_trace(path)
    with pytest.raises(SpecError):
        load_trace(tmp_path / "missing.json")


def test_sweep_csv(tmp_path, records):
    assert sweep_csv_text(records).splitlines() == [
        "family,n,seed,verdict,steps",
        "tree,4,0,converged(yes),150",
        "treechord,4,0,converged(yes),90",
    ]
    path = tmp_path / "sweep.csv"
    export_sweep_csv(records, path)
    assert path.read_text() == sweep_csv_text(records)


def test_sweep_markdown(tmp_path, records):
    path = tmp_path / "sweep.md"
    export_sweep_markdown(aggregate_sweep(records), "tree-id", path)
    text = path.read_text()
    assert text.startswith("# Sweep: `tree-id`")
    assert "| tree         |    4 |    1 |   1 |   0 |       0 |   100% |        150 |" in text
    assert "## Contradictions" in text
    assert "treechord n=4 seed=0: converged(yes), expected no" in text
