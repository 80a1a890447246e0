"""JSON export for traces, construction reports and interaction scripts."""

import json
from pathlib import Path

from ..engine import Trace
from ..errors import SpecError


def _dump(data, output_path: Path) -> None:
    # byte-stable: sorted keys, fixed separators
    text = json.dumps(data, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
    output_path.write_text(text + "\n", encoding="utf-8")


def export_trace(trace: Trace, output_path: Path) -> None:
    _dump(trace.to_dict(), Path(output_path))


def export_report(report: dict, output_path: Path) -> None:
    _dump(report, Path(output_path))


def export_script(interactions, output_path: Path) -> None:
    """Write interactions in the scheduler script format: a JSON list of [initiator, responder]."""
    _dump([[int(a), int(b)] for a, b in interactions], Path(output_path))


def load_trace(path: Path) -> Trace:
    path = Path(path).expanduser()
    try:
        return Trace.from_dict(json.loads(path.read_text(encoding="utf-8")))
    except (OSError, json.JSONDecodeError, KeyError, TypeError) as e:
        raise SpecError(f"cannot read trace {path}: {e}") from e
