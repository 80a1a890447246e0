"""Markdown export for sweep summaries."""

from pathlib import Path

from ..stats import SweepStats, format_steps


def export_sweep_markdown(stats: SweepStats, protocol: str, output_path: Path) -> None:
    """Export a sweep summary to a Markdown file.

    Args:
        stats: Aggregated sweep statistics
        protocol: Protocol spec the sweep ran
        output_path: Path to output Markdown file
    """
    sections = [
        f"# Sweep: `{protocol}`",
        _build_totals(stats),
        _build_group_table(stats),
        _build_contradictions(stats),
    ]
    Path(output_path).write_text("\n\n".join(filter(None, sections)) + "\n", encoding="utf-8")


def _build_totals(stats: SweepStats) -> str:
    verdict = "all runs agree with the class oracle" if stats.ok else f"{len(stats.contradictions)} contradiction(s)"
    return (
        f"- **Runs:** {stats.total_runs}\n"
        f"- **Timeouts:** {stats.total_timeouts} (after {stats.total_reruns} rerun(s) with a 10x budget)\n"
        f"- **Unconfirmed:** {stats.total_unconfirmed} verdict(s) rest on a quiet window only\n"
        f"- **Result:** {verdict}"
    )


def _build_group_table(stats: SweepStats) -> str:
    if not stats.groups:
        return ""
    table = "| Family       |    n | Runs | Yes |  No | Timeout | Oracle | Mean steps |\n"
    table += "|:-------------|-----:|-----:|----:|----:|--------:|-------:|-----------:|\n"
    for g in stats.groups:
        table += (f"| {g.family:<12} | {g.n:>4} | {g.runs:>4} | {g.yes:>3} | {g.no:>3} | {g.timeouts:>7} "
                  f"| {g.match_rate:>6.0%} | {format_steps(g.mean_steps):>10} |\n")
    return "## Verdicts by size\n\n" + table.rstrip("\n")


def _build_contradictions(stats: SweepStats) -> str:
    if stats.ok:
        return ""
    lines = [f"- {r.family} n={r.n} seed={r.seed}: {r.verdict}, expected {r.expected}" for r in stats.contradictions]
    return "## Contradictions\n\n" + "\n".join(lines)
