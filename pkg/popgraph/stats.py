"""Batch runs over graph families and seeds, and their aggregate statistics."""

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable

from .engine import run
from .errors import SpecError
from .graphs import generate
from .protocols import class_oracle, parse_protocol_spec
from .schedulers import parse_scheduler_spec

logger = logging.getLogger(__name__)

RERUN_FACTOR = 10

SEEDED_FAMILIES = {"tree", "treechord"}
FIXED_FAMILIES = {"line", "ring", "star", "complete"}


def family_graph_spec(family: str, n: int, seed: int) -> str:
    """Graph spec string for member (n, seed) of a sweep family.

    Families: line, ring, star, complete, tree, treechord, kregular:K, bipartite:P, petersen.
    """
    name, _, arg = family.partition(":")
    if name in FIXED_FAMILIES and not arg:
        return f"{name}:{n}"
    if name in SEEDED_FAMILIES and not arg:
        return f"{name}:{n}:{seed}"
    if name == "kregular" and arg:
        return f"kregular:{arg}:{n}:{seed}"
    if name == "bipartite" and arg:
        return f"bipartite:{n // 2}:{n - n // 2}:{arg}:{seed}"
    if name == "petersen" and not arg:
        return "petersen"
    raise SpecError(f"unknown sweep family {family!r}")


@dataclass(frozen=True)
class SweepTask:
    protocol: str
    family: str
    n: int
    seed: int
    scheduler: str = "random"
    max_steps: int = 1_000_000
    window_factor: int = 50
    confirm_cap: int = 20_000
    confirm_agents: int = 10
    extended_factor: int = 10


@dataclass
class SweepRecord:
    """One run of a sweep; `expected` is the class oracle's answer for the graph."""
    family: str
    n: int
    seed: int
    verdict: str
    steps: int
    expected: str | None = None
    reruns: int = 0
    confirmed: bool = False

    @property
    def matches(self) -> bool | None:
        if self.expected is None:
            return None
        return self.verdict == f"converged({self.expected})"

    @property
    def timed_out(self) -> bool:
        return self.verdict == "timeout"

    def csv_row(self) -> list:
        return [self.family, self.n, self.seed, self.verdict, self.steps]


def sweep_one(task: SweepTask) -> SweepRecord:
    """Run one (family, n, seed) member; a timeout is rerun once with a 10x step budget.

    Small graphs (n <= confirm_agents) only converge on an exhaustively confirmed stable
    configuration; larger ones need outputs quiet for window x extended_factor steps.
    """
    graph = generate(family_graph_spec(task.family, task.n, task.seed))
    protocol = parse_protocol_spec(task.protocol, n=graph.n)
    oracle = class_oracle(protocol)
    window = max(1, task.window_factor * graph.n * graph.m)
    confirm_cap = task.confirm_cap if graph.n <= task.confirm_agents else None
    scheduler_spec = f"random:{task.seed}" if task.scheduler == "random" else task.scheduler

    max_steps = max(task.max_steps, window)
    trace = run(protocol, graph, parse_scheduler_spec(scheduler_spec), max_steps, window, record=False,
                confirm_cap=confirm_cap, extended_factor=task.extended_factor)
    reruns = 0
    if trace.verdict == "timeout":
        logger.warning("%s on %s timed out after %d steps; rerunning with %dx budget",
                       protocol.spec, graph, max_steps, RERUN_FACTOR)
        reruns = 1
        trace = run(protocol, graph, parse_scheduler_spec(scheduler_spec), max_steps * RERUN_FACTOR, window,
                    record=False, confirm_cap=confirm_cap, extended_factor=task.extended_factor)
    return SweepRecord(
        family=task.family,
        n=graph.n,
        seed=task.seed,
        verdict=trace.verdict,
        steps=trace.step_count,
        expected=("yes" if oracle(graph) else "no") if oracle else None,
        reruns=reruns,
        confirmed=trace.confirmed,
    )


def run_sweep(tasks: list[SweepTask], workers: int = 1,
              progress: Callable[[SweepRecord], None] | None = None) -> list[SweepRecord]:
    """Execute tasks in order (in-process, or on a process pool when workers > 1)."""
    records = []
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for record in pool.map(sweep_one, tasks):
                records.append(record)
                if progress:
                    progress(record)
    else:
        for task in tasks:
            record = sweep_one(task)
            records.append(record)
            if progress:
                progress(record)
    return records


@dataclass
class GroupStats:
    """Verdict counts for one (family, n) group."""
    family: str
    n: int
    runs: int = 0
    yes: int = 0
    no: int = 0
    timeouts: int = 0
    matches: int = 0
    reruns: int = 0
    unconfirmed: int = 0
    total_steps: int = 0

    @property
    def mean_steps(self) -> float:
        return self.total_steps / self.runs if self.runs else 0.0

    @property
    def match_rate(self) -> float:
        return self.matches / self.runs if self.runs else 0.0


@dataclass
class SweepStats:
    groups: list[GroupStats] = field(default_factory=list)
    total_runs: int = 0
    total_timeouts: int = 0
    total_reruns: int = 0
    total_unconfirmed: int = 0
    contradictions: list[SweepRecord] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.contradictions


def aggregate_sweep(records: Iterable[SweepRecord]) -> SweepStats:
    """Group records by (family, n); a converged verdict disagreeing with the oracle is a contradiction."""
    groups: dict[tuple[str, int], GroupStats] = {}
    stats = SweepStats()
    for record in records:
        key = (record.family, record.n)
        group = groups.setdefault(key, GroupStats(record.family, record.n))
        group.runs += 1
        group.total_steps += record.steps
        group.reruns += record.reruns
        if record.verdict == "converged(yes)":
            group.yes += 1
        elif record.verdict == "converged(no)":
            group.no += 1
        else:
            group.timeouts += 1
        unconfirmed = not record.timed_out and not record.confirmed
        group.unconfirmed += unconfirmed
        if record.matches:
            group.matches += 1
        elif record.matches is False and not record.timed_out:
            stats.contradictions.append(record)

        stats.total_runs += 1
        stats.total_timeouts += record.timed_out
        stats.total_reruns += record.reruns
        stats.total_unconfirmed += unconfirmed

    stats.groups = sorted(groups.values(), key=lambda g: (g.family, g.n))
    return stats


def format_steps(steps: int | float) -> str:
    """Compact step count for display."""
    if steps >= 1_000_000_000:
        return f"{steps / 1_000_000_000:.1f}B"
    if steps >= 1_000_000:
        return f"{steps / 1_000_000:.1f}M"
    if steps >= 1_000:
        return f"{steps / 1_000:.1f}K"
    return str(int(steps))
