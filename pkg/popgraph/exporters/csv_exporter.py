"""CSV export for sweep results (columns: family, n, seed, verdict, steps)."""

import csv
import io
from pathlib import Path

from ..stats import SweepRecord

COLUMNS = ["family", "n", "seed", "verdict", "steps"]


def sweep_csv_text(records: list[SweepRecord]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(COLUMNS)
    for record in records:
        writer.writerow(record.csv_row())
    return buffer.getvalue()


def export_sweep_csv(records: list[SweepRecord], output_path: Path) -> None:
    Path(output_path).write_text(sweep_csv_text(records), encoding="utf-8")
