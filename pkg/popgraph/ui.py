"""Rich-based terminal rendering for runs, stability reports, constructions and sweeps."""

from rich.console import Console, Group
from rich.panel import Panel
from rich.progress import BarColumn, MofNCompleteColumn, Progress, SpinnerColumn, TextColumn
from rich.style import Style
from rich.table import Table
from rich.text import Text

from .engine import Protocol, StabilityReport, Trace
from .graphs import Graph
from .stats import SweepStats, format_steps

COLORS = {
    "orange": "#C96442",
    "purple": "#9B59B6",
    "blue": "#3498DB",
    "green": "#27AE60",
    "yellow": "#F1C40F",
    "red": "#E74C3C",
    "white": "#ECF0F1",
    "gray": "#7F8C8D",
    "dark": "#2C3E50",
}

VERDICT_COLORS = {
    "converged(yes)": COLORS["green"],
    "converged(no)": COLORS["blue"],
    "all-yes-stable": COLORS["green"],
    "all-no-stable": COLORS["blue"],
    "timeout": COLORS["yellow"],
    "end-of-script": COLORS["gray"],
    "mixed": COLORS["orange"],
    "not-convergent": COLORS["red"],
}


def verdict_text(verdict: str) -> Text:
    return Text(verdict, style=Style(color=VERDICT_COLORS.get(verdict, COLORS["white"]), bold=True))


def create_output_strip(vector: str, width: int = 60) -> Text:
    """One block per agent: green for yes, blue for no (truncated past `width` agents)."""
    strip = Text()
    for y in vector[:width]:
        strip.append("█", style=Style(color=COLORS["green"] if y == "y" else COLORS["blue"]))
    if len(vector) > width:
        strip.append(f" +{len(vector) - width}", style=Style(color=COLORS["gray"]))
    return strip


def _facts_table(rows: list[tuple[str, object]]) -> Table:
    table = Table(show_header=False, box=None, padding=(0, 2))
    table.add_column(style=Style(color=COLORS["gray"]))
    table.add_column(style=Style(color=COLORS["white"]))
    for label, value in rows:
        table.add_row(label, value if isinstance(value, Text) else str(value))
    return table


def render_run(trace: Trace, protocol: Protocol, graph: Graph, console: Console | None = None) -> None:
    console = console or Console()
    final_vector = trace.outputs[-1][1] if trace.outputs else ""
    rows = [
        ("protocol", protocol.spec),
        ("states", protocol.state_count),
        ("graph", f"{graph.label}  (n={graph.n}, m={graph.m})"),
        ("scheduler", trace.scheduler),
        ("verdict", verdict_text(trace.verdict)),
        ("steps", f"{trace.step_count:,}"),
    ]
    if trace.converged_at is not None:
        rows.append(("last output change", f"{trace.converged_at:,}"))
        rows.append(("stability", "confirmed exhaustively" if trace.confirmed else "quiet window only"))
    rows.append(("outputs", create_output_strip(final_vector)))
    console.print(Panel(_facts_table(rows), title="Run", border_style=Style(color=COLORS["orange"]), padding=(1, 1)))


def render_stability(report: StabilityReport, expected: str | None, console: Console | None = None) -> None:
    console = console or Console()
    rows = [
        ("protocol", report.protocol),
        ("graph", report.graph),
        ("reachable", f"{report.reachable_count:,} configurations"),
        ("verdict", verdict_text(report.verdict)),
    ]
    if expected is not None:
        matches = report.output == expected
        rows.append(("oracle", Text(f"{expected} ({'match' if matches else 'MISMATCH'})",
                                    style=Style(color=COLORS["green"] if matches else COLORS["red"]))))

    components = Table(show_header=True, header_style=Style(color=COLORS["white"], bold=True), box=None,
                       padding=(0, 2))
    components.add_column("Bottom SCC", style=Style(color=COLORS["gray"]))
    components.add_column("Size", justify="right", style=Style(color=COLORS["blue"]))
    components.add_column("Output", justify="right")
    for i, component in enumerate(report.components[:10], 1):
        components.add_row(f"#{i}", f"{component['size']:,}", verdict_text(component["output"]))
    if len(report.components) > 10:
        components.add_row("…", f"{len(report.components) - 10} more", "")

    console.print(Panel(Group(_facts_table(rows), Text(), components), title="Stability",
                        border_style=Style(color=COLORS["purple"]), padding=(1, 1)))


def render_construction(title: str, report: dict, console: Console | None = None) -> None:
    """Summarize a construction report: scalar fields as rows, then pass/fail."""
    console = console or Console()
    rows = []
    for key, value in report.items():
        if key in ("passed", "construction"):
            continue
        if isinstance(value, dict):
            if "debt" in value:
                value = "zero debt" if not value["debt"] else f"debt on {len(value['debt'])} pair(s)"
            elif "checked" in value:
                value = f"{value['checked']:,} checked, {len(value['violations'])} violation(s)"
            else:
                value = ", ".join(f"{k}={v}" for k, v in value.items())
        elif isinstance(value, list):
            if len(value) > 8:
                value = f"{len(value)} entries"
            else:
                value = " ".join(str(v) for v in value)
        rows.append((key.replace("_", " "), value))
    passed = report.get("passed")
    if passed is not None:
        rows.append(("result", Text("PASS" if passed else "FAIL",
                                    style=Style(color=COLORS["green"] if passed else COLORS["red"], bold=True))))
    console.print(Panel(_facts_table(rows), title=title, border_style=Style(color=COLORS["blue"]), padding=(1, 1)))


def create_sweep_progress(console: Console) -> Progress:
    return Progress(
        SpinnerColumn(style=COLORS["orange"]),
        TextColumn("{task.description}"),
        BarColumn(complete_style=COLORS["orange"], finished_style=COLORS["green"]),
        MofNCompleteColumn(),
        console=console,
        transient=True,
    )


def create_sweep_table(stats: SweepStats) -> Panel:
    table = Table(
        show_header=True,
        header_style=Style(color=COLORS["white"], bold=True),
        border_style=Style(color=COLORS["dark"]),
        box=None,
        padding=(0, 2),
        expand=True,
    )
    table.add_column("Family", style=Style(color=COLORS["gray"]), ratio=3)
    table.add_column("n", justify="right", ratio=1)
    table.add_column("Runs", justify="right", ratio=1)
    table.add_column("Yes", justify="right", style=Style(color=COLORS["green"]), ratio=1)
    table.add_column("No", justify="right", style=Style(color=COLORS["blue"]), ratio=1)
    table.add_column("Timeout", justify="right", style=Style(color=COLORS["yellow"]), ratio=1)
    table.add_column("Oracle", justify="right", ratio=1)
    table.add_column("Mean steps", justify="right", style=Style(color=COLORS["orange"]), ratio=2)

    for group in stats.groups:
        rate = group.match_rate
        table.add_row(
            group.family,
            str(group.n),
            str(group.runs),
            str(group.yes),
            str(group.no),
            str(group.timeouts),
            Text(f"{rate:.0%}", style=Style(color=COLORS["green"] if rate == 1 else COLORS["red"])),
            format_steps(group.mean_steps),
        )
    table.add_row("", "", "", "", "", "", "", "")
    table.add_row("Total", "", str(stats.total_runs), "", "", str(stats.total_timeouts),
                  str(len(stats.contradictions)) + " bad", "", style=Style(bold=True))
    return Panel(table, title="Sweep", border_style=Style(color=COLORS["green"]), padding=(1, 1))


def render_sweep(stats: SweepStats, console: Console | None = None) -> None:
    console = console or Console()
    console.print(create_sweep_table(stats))
    for record in stats.contradictions[:10]:
        console.print(f"[red]✗[/red] {record.family} n={record.n} seed={record.seed}: "
                      f"{record.verdict}, oracle says {record.expected}")
