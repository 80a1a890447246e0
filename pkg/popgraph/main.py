"""popgraph - Main entry point."""

import argparse
import sys
from pathlib import Path

from rich.console import Console

from . import __version__
from .config import Settings, setup_logging
from .engine import check_stable, run
from .errors import (BudgetExceeded, CapExceeded, ConfigError, ConstructionError, GraphError, InvalidInteraction,
                     SpecError)
from .exporters import (export_report, export_script, export_sweep_csv, export_sweep_markdown, export_trace, load_trace,
                        sweep_csv_text)
from .graphs import generate, parse_graph_spec, write_graph_file
from .impossibility import (build_bipartite_triple, build_doubled_execution, build_line_ring_executions,
                            build_triangle_to_ring_execution, edge_removal_counterexample)
from .interactive import interactive_mode, should_use_interactive_mode
from .protocols import class_oracle, parse_protocol_spec, probes_for
from .schedulers import ScriptScheduler, parse_scheduler_spec
from .stats import SweepTask, aggregate_sweep, run_sweep
from .ui import create_sweep_progress, render_construction, render_run, render_stability, render_sweep

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_TIMEOUT = 2
EXIT_BUDGET = 3
EXIT_MISMATCH = 4
EXIT_INTERRUPTED = 130

IMPOSSIBILITY_KINDS = ["weak-double", "line-ring", "bipartite", "arbitrary-init"]

EPILOG = """
Examples:
  popgraph                                              Interactive mode (prompts for a command)
  popgraph run --protocol tree-id --graph tree:10:7 --scheduler random:42
  popgraph run --protocol star-id:n=6 --graph star:6 --scheduler rr
  popgraph check-stable --protocol tree-id --graph ring:3
  popgraph impossibility weak-double --protocol tree-id --graph line:3
  popgraph impossibility arbitrary-init --protocol tree-id --graph ring:4 --edge 0-1
  popgraph sweep --protocol tree-id --family tree --sizes 2..20 --seeds 10 --out trees.csv
  popgraph gen-graph --graph kregular:3:10:1 --out petersenish.txt
  popgraph replay --trace run.json
"""


def main(argv: list[str] | None = None):
    """Main entry point for popgraph."""
    try:
        code = _run(sys.argv[1:] if argv is None else argv)
    except KeyboardInterrupt:
        Console().print("\n\n[yellow]Interrupted.[/yellow]")
        code = EXIT_INTERRUPTED
    sys.exit(code)


class _Parser(argparse.ArgumentParser):
    """Argument errors exit with the usage code (1) instead of argparse's 2, which means timeout here."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="popgraph",
        description="popgraph - graph class identification with population protocols",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=EPILOG,
    )
    parser.add_argument("--version", action="version", version=f"popgraph {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="Debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="Simulate a protocol until outputs converge or the budget runs out")
    p.add_argument("--protocol", required=True, help="tree-id | kreg-id:k=K[,bound=B][,exact] | star-id[:n=N]")
    p.add_argument("--graph", required=True, help="Graph spec, e.g. tree:10:7, ring:5, file:PATH")
    p.add_argument("--scheduler", default="random:0", help="random:SEED | rr | rr:oneway | script:PATH")
    p.add_argument("--max-steps", type=int, help="Step budget (default: POPGRAPH_MAX_STEPS)")
    p.add_argument("--window", type=int, help="Output-quiescence window (default: factor x n x |E|)")
    p.add_argument("--out", type=str, help="Write the JSON trace here")

    p = sub.add_parser("check-stable", help="Exhaustive bottom-SCC stability check from the initial configuration")
    p.add_argument("--protocol", required=True)
    p.add_argument("--graph", required=True)
    p.add_argument("--cap", type=int, help="Maximum reachable configurations (default: POPGRAPH_CAP)")
    p.add_argument("--out", type=str, help="Write the JSON report here")

    p = sub.add_parser("impossibility", help="Execute a counterexample construction")
    p.add_argument("kind", choices=IMPOSSIBILITY_KINDS)
    p.add_argument("--protocol", default="tree-id")
    p.add_argument("--graph", help="Base graph (weak-double: line:3, arbitrary-init: ring:4)")
    p.add_argument("--edge", default="0-1", help="Edge to remove for arbitrary-init, as u-v")
    p.add_argument("--segments", type=int, default=100, help="Mirrored segments for weak-double")
    p.add_argument("--phases", type=int, default=12, help="Pumping phases for line-ring")
    p.add_argument("--steps", type=int, default=10_000, help="Triangle steps for bipartite")
    p.add_argument("--seed", type=int, default=0, help="Random scheduler seed for arbitrary-init")
    p.add_argument("--cap", type=int)
    p.add_argument("--out", type=str, help="Write the JSON report here")
    p.add_argument("--script-out", type=str,
                   help="Write the constructed execution as a script:PATH file (graph saved as *.graph.txt)")

    p = sub.add_parser("sweep", help="Batch runs over a graph family, sizes and seeds")
    p.add_argument("--protocol", required=True)
    p.add_argument("--family", required=True,
                   help="line | ring | star | complete | tree | treechord | kregular:K | bipartite:P | petersen")
    p.add_argument("--sizes", required=True, help="e.g. 2..20 or 3,5,8")
    p.add_argument("--seeds", default="10", help="Seed count N (seeds 0..N-1) or a range a..b")
    p.add_argument("--scheduler", default="random", help="random (seeded per run) | rr | rr:oneway")
    p.add_argument("--max-steps", type=int)
    p.add_argument("--workers", type=int, help="Worker processes (default: POPGRAPH_SWEEP_WORKERS)")
    p.add_argument("--out", type=str, help="Write CSV here (default: print CSV)")
    p.add_argument("--markdown", type=str, help="Also write a Markdown summary here")

    p = sub.add_parser("gen-graph", help="Write a graph as an edge-list file")
    p.add_argument("--graph", required=True)
    p.add_argument("--out", type=str, help="Output path (default: stdout)")

    p = sub.add_parser("replay", help="Re-execute a stored trace and check every recorded state")
    p.add_argument("--trace", required=True)
    p.add_argument("--graph", help="Graph spec (default: the one stored in the trace)")
    p.add_argument("--protocol", help="Protocol spec (default: rebuilt from the trace)")
    return parser


def _run(argv: list[str]) -> int:
    """Internal run function."""
    if should_use_interactive_mode(argv):
        argv = interactive_mode()

    args = build_parser().parse_args(argv)
    console = Console()
    try:
        settings = Settings.from_env()
    except ConfigError as e:
        console.print(f"[red]Error:[/red] {e}")
        return EXIT_USAGE
    setup_logging("DEBUG" if args.verbose else settings.log_level)

    commands = {
        "run": cmd_run,
        "check-stable": cmd_check_stable,
        "impossibility": cmd_impossibility,
        "sweep": cmd_sweep,
        "gen-graph": cmd_gen_graph,
        "replay": cmd_replay,
    }
    try:
        return commands[args.command](args, settings, console)
    except (SpecError, GraphError, InvalidInteraction, ValueError) as e:
        console.print(f"[red]Error:[/red] {e}")
        return EXIT_USAGE
    except CapExceeded as e:
        console.print(f"[red]Error:[/red] {e}")
        console.print("\nRaise --cap or POPGRAPH_CAP, or try a smaller graph.")
        return EXIT_BUDGET
    except BudgetExceeded as e:
        console.print(f"[red]Error:[/red] {e}")
        return EXIT_BUDGET
    except ConstructionError as e:
        console.print(f"[red]Construction failed:[/red] {e}")
        return EXIT_MISMATCH


def _write(console: Console, path: str, writer, payload) -> None:
    out = Path(path)
    writer(payload, out)
    console.print(f"\n[green]✓[/green] Wrote [bold]{out}[/bold]")


def cmd_run(args, settings: Settings, console: Console) -> int:
    graph = generate(args.graph)
    protocol = parse_protocol_spec(args.protocol, n=graph.n)
    scheduler = parse_scheduler_spec(args.scheduler)
    if isinstance(scheduler, ScriptScheduler):
        scheduler.validate(graph)
    max_steps = args.max_steps or settings.max_steps
    window = args.window or min(settings.window_for(graph.n, graph.m), max_steps)
    if not 1 <= window <= max_steps:
        raise ValueError(f"need --max-steps >= --window >= 1, got {max_steps} and {window}")

    probes = probes_for(protocol)
    trace = run(protocol, graph, scheduler, max_steps, window, monitors=probes, record=bool(args.out),
                confirm_cap=settings.confirm_cap_for(graph.n), extended_factor=settings.extended_factor)
    render_run(trace, protocol, graph, console)
    if args.out:
        _write(console, args.out, export_trace, trace)

    broken = [p for p in probes if not p.ok]
    for probe in broken:
        console.print(f"[red]Invariant violated:[/red] {probe.name} at step {probe.violations[0]} "
                      f"({len(probe.violations)} violation(s))")
    if broken:
        return EXIT_MISMATCH
    return EXIT_OK if trace.converged else EXIT_TIMEOUT


def cmd_check_stable(args, settings: Settings, console: Console) -> int:
    graph = generate(args.graph)
    protocol = parse_protocol_spec(args.protocol, n=graph.n)
    report = check_stable(protocol, graph, cap=args.cap or settings.cap)
    oracle = class_oracle(protocol)
    expected = ("yes" if oracle(graph) else "no") if oracle else None
    render_stability(report, expected, console)
    if args.out:
        _write(console, args.out, export_report, {**report.to_dict(), "expected": expected})
    if expected is not None and report.output != expected:
        return EXIT_MISMATCH
    return EXIT_OK


def _parse_edge(text: str) -> tuple[int, int]:
    try:
        u, v = (int(part) for part in text.split("-"))
    except ValueError:
        raise SpecError(f"edge must look like u-v, got {text!r}") from None
    return u, v


def _write_execution(console: Console, path: str, graph, trace) -> None:
    """Write an execution as a scheduler script, plus the graph it runs on next to it."""
    out = Path(path)
    graph_path = out.with_suffix(".graph.txt")
    export_script(trace.interactions(), out)
    graph_path.write_bytes(write_graph_file(graph))
    console.print(f"\n[green]✓[/green] Wrote [bold]{out}[/bold] ({trace.step_count:,} interactions) "
                  f"and [bold]{graph_path}[/bold]")


def cmd_impossibility(args, settings: Settings, console: Console) -> int:
    kind = args.kind
    if kind == "weak-double":
        graph = generate(args.graph or "line:3")
        protocol = parse_protocol_spec(args.protocol, n=graph.n)
        result = build_doubled_execution(protocol, graph, args.segments, settings.period_budget)
        reports = {"weak-double": result.to_dict()}
        execution = (result.doubled.doubled, result.doubled_trace)
    elif kind == "line-ring":
        protocol = parse_protocol_spec(args.protocol, n=4)
        result = build_line_ring_executions(protocol, phases=args.phases)
        reports = {"line-ring": result.to_dict()}
        execution = (result.ring, result.ring_trace)
    elif kind == "bipartite":
        protocol = parse_protocol_spec(args.protocol, n=3)
        triple = build_bipartite_triple()
        mirrored = build_triangle_to_ring_execution(protocol, args.steps)
        reports = {
            "bipartite-triple": {"construction": "bipartite-triple", **triple.oracle_checks(),
                                 "doubled_triangle_edges": triple.doubled_triangle.m, "passed": triple.passed},
            "triangle-to-ring": mirrored.to_dict(),
            "weak-double": build_doubled_execution(protocol, triple.triangle, args.segments,
                                                   settings.period_budget).to_dict(),
        }
        execution = (triple.six_ring, mirrored.ring_trace)
    else:
        graph = generate(args.graph or "ring:4")
        protocol = parse_protocol_spec(args.protocol, n=graph.n)
        report = edge_removal_counterexample(
            protocol, graph, _parse_edge(args.edge), seed=args.seed, max_steps=settings.max_steps,
            cap=args.cap or settings.cap, record=bool(args.script_out))
        reports = {"arbitrary-init": report.to_dict()}
        execution = (report.graph, report.base_trace)

    for title, report in reports.items():
        render_construction(title, report, console)
    if args.out:
        payload = next(iter(reports.values())) if len(reports) == 1 else reports
        _write(console, args.out, export_report, payload)
    if args.script_out:
        _write_execution(console, args.script_out, *execution)
    return EXIT_OK if all(r["passed"] for r in reports.values()) else EXIT_MISMATCH


def parse_range(text: str) -> list[int]:
    """``a..b`` (inclusive), ``a,b,c`` or a single integer."""
    try:
        if ".." in text:
            lo, hi = (int(part) for part in text.split(".."))
            return list(range(lo, hi + 1))
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise SpecError(f"expected a..b, a,b,c or an integer, got {text!r}") from None


def cmd_sweep(args, settings: Settings, console: Console) -> int:
    sizes = parse_range(args.sizes)
    seeds = parse_range(args.seeds) if ".." in args.seeds or "," in args.seeds else list(range(int(args.seeds)))
    if args.scheduler not in ("random", "rr", "rr:oneway"):
        raise SpecError(f"sweep scheduler must be random, rr or rr:oneway, got {args.scheduler!r}")
    parse_protocol_spec(args.protocol, n=max(sizes))
    tasks = [
        SweepTask(args.protocol, args.family, n, seed, args.scheduler,
                  args.max_steps or settings.max_steps, settings.window_factor,
                  settings.confirm_cap, settings.confirm_agents, settings.extended_factor)
        for n in sizes for seed in seeds
    ]

    with create_sweep_progress(console) as progress:
        task_id = progress.add_task(f"{args.protocol} on {args.family}", total=len(tasks))
        records = run_sweep(tasks, workers=args.workers or settings.sweep_workers,
                            progress=lambda _: progress.advance(task_id))
    stats = aggregate_sweep(records)
    render_sweep(stats, console)

    if args.out:
        _write(console, args.out, export_sweep_csv, records)
    else:
        console.print(sweep_csv_text(records), markup=False, highlight=False, end="")
    if args.markdown:
        _write(console, args.markdown, lambda s, p: export_sweep_markdown(s, args.protocol, p), stats)

    if not stats.ok:
        return EXIT_MISMATCH
    return EXIT_TIMEOUT if stats.total_timeouts else EXIT_OK


def cmd_gen_graph(args, settings: Settings, console: Console) -> int:
    graph = generate(parse_graph_spec(args.graph))
    data = write_graph_file(graph)
    if args.out:
        _write(console, args.out, lambda d, p: p.write_bytes(d), data)
    else:
        sys.stdout.write(data.decode("ascii"))
    return EXIT_OK


def _protocol_spec_from_trace(name: str, params: dict) -> str:
    parts = [key if value is True else f"{key}={value}" for key, value in params.items() if value is not False]
    return f"{name}:{','.join(parts)}" if parts else name


def cmd_replay(args, settings: Settings, console: Console) -> int:
    trace = load_trace(args.trace)
    graph = generate(args.graph or trace.graph)
    protocol = parse_protocol_spec(args.protocol or _protocol_spec_from_trace(trace.protocol, trace.params),
                                   n=graph.n)
    mismatch = trace.verify_replay(protocol, graph)
    if mismatch is not None:
        console.print(f"[red]Replay diverged[/red] at step {mismatch}")
        return EXIT_MISMATCH
    console.print(f"[green]✓[/green] Replayed {len(trace.steps):,} steps of {trace.protocol} on {graph.label}: "
                  "every recorded state reproduced")
    return EXIT_OK


if __name__ == "__main__":
    main()
