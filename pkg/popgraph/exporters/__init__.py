"""Exporters for popgraph - JSON traces and reports, sweep CSV and Markdown."""

from .csv_exporter import export_sweep_csv, sweep_csv_text
from .json_exporter import export_report, export_script, export_trace, load_trace
from .markdown_exporter import export_sweep_markdown

__all__ = [
    "export_report",
    "export_script",
    "export_sweep_csv",
    "export_sweep_markdown",
    "export_trace",
    "load_trace",
    "sweep_csv_text",
]
