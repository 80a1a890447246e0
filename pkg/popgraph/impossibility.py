"""Executable counterexample constructions for weak fairness and arbitrary initial states.

Every construction emits interaction scripts and replays them through the ordinary
engine, checking the agent correspondence between the two graphs exactly (state
equality, not just output equality).
"""

import logging
import math
from dataclasses import dataclass, field

from .engine import (Configuration, Protocol, Trace, execute_script, is_stable_configuration, run, step,
                     uniform_output)
from .errors import BudgetExceeded, CapExceeded, ConstructionError, GraphError
from .graphs import Graph, complete_graph, is_bipartite, line_graph, ring_graph
from .protocols import class_oracle
from .schedulers import FairnessReport, RandomScheduler, RoundRobinScheduler, fairness_audit

logger = logging.getLogger(__name__)

PIVOT = 0
ARBITRARY_INIT_WINDOW_FACTOR = 10_000
ARBITRARY_INIT_CONFIRM_CAP = 20_000


# === GRAPH DOUBLING ===

@dataclass(frozen=True)
class DoubledGraph:
    """Two copies of `base` (agents x and x+n) plus cross edges at the pivot agent."""
    base: Graph
    doubled: Graph
    pivot: int = PIVOT


def double_graph(g: Graph) -> DoubledGraph:
    """Copies {(x, y), (x+n, y+n)} plus, for every base edge (0, z), cross edges (0, z+n) and (n, z)."""
    if g.n < 2:
        raise GraphError(f"doubling needs at least 2 agents, got {g.n}")
    n = g.n
    edges = []
    for x, y in g.edges:
        edges.append((x, y))
        edges.append((x + n, y + n))
        if x == PIVOT:
            edges.append((PIVOT, y + n))
            edges.append((n, y))
    doubled = Graph.from_edges(2 * n, edges, label=f"double({g.label})")
    return DoubledGraph(base=g, doubled=doubled)


@dataclass
class EquivalenceWitness:
    """Boundary snapshots of a base execution and its mirrored execution.

    Agent x of the base corresponds to agents x and x+n of the mirror.
    """
    n: int
    pairs: list[tuple[int, Configuration, Configuration]] = field(default_factory=list)
    violations: list[int] = field(default_factory=list)

    def record(self, position: int, base: Configuration, mirror: Configuration) -> bool:
        n = self.n
        ok = all(base[x] == mirror[x] == mirror[x + n] for x in range(n))
        self.pairs.append((position, base, mirror))
        if not ok:
            self.violations.append(position)
        return ok

    @property
    def holds(self) -> bool:
        return bool(self.pairs) and not self.violations

    def to_dict(self, samples: int = 5) -> dict:
        return {
            "checked": len(self.pairs),
            "violations": self.violations,
            "samples": [{"position": p, "base": list(b), "mirror": list(m)} for p, b, m in self.pairs[:samples]],
        }


def _sweep(protocol: Protocol, graph: Graph, config: Configuration, pairs) -> Configuration:
    for pair in pairs:
        config = step(protocol, graph, config, pair)
    return config


def find_boundary_period(protocol: Protocol, graph: Graph, budget: int) -> tuple[int, int]:
    """(mu, lam): round-robin sweep boundaries repeat with period lam from sweep mu on."""
    pairs = graph.ordered_pairs()
    config = protocol.initial_configuration(graph.n)
    seen = {config: 0}
    for j in range(1, budget + 1):
        config = _sweep(protocol, graph, config, pairs)
        if config in seen:
            mu = seen[config]
            logger.info("sweep boundaries of %s on %s are periodic: mu=%d, lam=%d",
                        protocol.spec, graph, mu, j - mu)
            return mu, j - mu
        seen[config] = j
    raise BudgetExceeded(f"no periodic sweep boundary within {budget:,} sweeps on {graph}")


def segment_script(g: Graph, segment: int, sweep: list[tuple[int, int]]) -> list[tuple[int, int]]:
    """Interactions on the doubled graph mirroring one base sweep.

    Even segments run the sweep in copy A (x) then copy B (x+n). Odd segments swap the
    pivot's roles: copy A uses agent n in place of 0, copy B uses agent 0 in place of n.
    """
    n = g.n
    if segment % 2 == 0:
        first = [(x, y) for x, y in sweep]
        second = [(x + n, y + n) for x, y in sweep]
    else:
        def a_map(z: int) -> int:
            return n if z == PIVOT else z

        def b_map(z: int) -> int:
            return PIVOT if z == PIVOT else z + n

        first = [(a_map(x), a_map(y)) for x, y in sweep]
        second = [(b_map(x), b_map(y)) for x, y in sweep]
    return first + second


@dataclass
class DoublingResult:
    doubled: DoubledGraph
    mu: int
    lam: int
    segments: int
    base_trace: Trace
    doubled_trace: Trace
    witness: EquivalenceWitness
    boundary_outputs: list[str | None]
    fairness: FairnessReport

    @property
    def passed(self) -> bool:
        settled = self.boundary_outputs[self.mu:]
        return (self.witness.holds and self.fairness.fair
                and len(set(settled)) == 1 and settled[0] is not None)

    def to_dict(self) -> dict:
        return {
            "construction": "weak-double",
            "base": self.doubled.base.label,
            "doubled": self.doubled.doubled.label,
            "doubled_edges": [list(e) for e in self.doubled.doubled.edges],
            "mu": self.mu,
            "lam": self.lam,
            "segments": self.segments,
            "boundary_outputs": self.boundary_outputs,
            "witness": self.witness.to_dict(),
            "fairness": self.fairness.to_dict(),
            "passed": self.passed,
        }


def build_doubled_execution(protocol: Protocol, g: Graph, segment_count: int = 100,
                            period_budget: int = 100_000) -> DoublingResult:
    """Mirror a round-robin execution on `g` into a weakly fair execution on its doubled graph."""
    doubled = double_graph(g)
    mu, lam = find_boundary_period(protocol, g, period_budget)
    period = math.lcm(lam, 2)
    segments = max(segment_count, mu + period)

    sweep = g.ordered_pairs()
    n = g.n
    config = protocol.initial_configuration(n)
    mirror = protocol.initial_configuration(2 * n)
    witness = EquivalenceWitness(n)
    witness.record(0, config, mirror)
    boundary_outputs = [uniform_output(protocol, mirror)]
    base_script: list[tuple[int, int]] = []
    doubled_script: list[tuple[int, int]] = []
    period_script: list[tuple[int, int]] = []

    for j in range(segments):
        mapped = segment_script(g, j, sweep)
        config = _sweep(protocol, g, config, sweep)
        mirror = _sweep(protocol, doubled.doubled, mirror, mapped)
        if not witness.record(j + 1, config, mirror):
            raise ConstructionError(f"segment {j}: doubled configuration is not equivalent to the base")
        boundary_outputs.append(uniform_output(protocol, mirror))
        base_script.extend(sweep)
        doubled_script.extend(mapped)
        if mu <= j < mu + period:
            period_script.extend(mapped)

    logger.info("doubling on %s: %d segments, witness holds at every boundary", g, segments)
    return DoublingResult(
        doubled=doubled,
        mu=mu,
        lam=lam,
        segments=segments,
        base_trace=execute_script(protocol, g, base_script, spec="rr"),
        doubled_trace=execute_script(protocol, doubled.doubled, doubled_script, spec="script:doubled"),
        witness=witness,
        boundary_outputs=boundary_outputs,
        fairness=fairness_audit(period_script, doubled.doubled),
    )


# === PUMP PAIR ===

@dataclass(frozen=True)
class PumpPair:
    """Positions i < j of the alternating two-agent sequence holding the same pair (sa, sb)."""
    sa: int
    sb: int
    i: int
    j: int

    def to_dict(self) -> dict:
        return {"sa": self.sa, "sb": self.sb, "i": self.i, "j": self.j}


def alternating_pairs(protocol: Protocol, steps: int) -> list[tuple[int, int]]:
    """Positions 0..steps of the sequence: u initiates on odd steps, w on even steps."""
    a = b = protocol.initial
    pairs = [(a, b)]
    for k in range(1, steps + 1):
        if k % 2:
            a, b = protocol.delta(a, b)
        else:
            b, a = protocol.delta(b, a)
        pairs.append((a, b))
    return pairs


def find_pump_pair(protocol: Protocol, aligned: bool = False) -> PumpPair:
    """First repeated (u-state, w-state) pair from position 1 on.

    With ``aligned=True`` positions only match when they share parity, so the gap j - i
    is even and one pump cycle contains both orientations.
    """
    a = b = protocol.initial
    seen: dict[tuple, int] = {}
    k = 0
    while True:
        k += 1
        if k % 2:
            a, b = protocol.delta(a, b)
        else:
            b, a = protocol.delta(b, a)
        key = (a, b, k % 2) if aligned else (a, b)
        if key in seen:
            pump = PumpPair(a, b, seen[key], k)
            logger.info("pump pair for %s: %s", protocol.spec, pump)
            return pump
        seen[key] = k


def _drive(u: int, w: int, start: int, stop: int) -> list[tuple[int, int]]:
    """Interactions for positions start+1..stop of the alternating sequence on agents (u, w)."""
    return [(u, w) if k % 2 else (w, u) for k in range(start + 1, stop + 1)]


@dataclass
class LineRingResult:
    pump: PumpPair
    outputs: tuple[str, ...]
    line_trace: Trace
    ring_trace: Trace
    line_boundaries: list[Configuration]
    ring_boundaries: list[Configuration]
    line_fairness: FairnessReport
    ring_fairness: FairnessReport
    ring: Graph

    def boundary_outputs(self, boundaries: list[Configuration]) -> set[tuple[str, ...]]:
        return {tuple(self.outputs[s] for s in c) for c in boundaries}

    @property
    def outputs_agree(self) -> bool:
        line = self.boundary_outputs(self.line_boundaries)
        return len(line) == 1 and line == self.boundary_outputs(self.ring_boundaries)

    @property
    def passed(self) -> bool:
        return self.outputs_agree and self.line_fairness.fair and self.ring_fairness.fair

    def to_dict(self) -> dict:
        vectors = sorted(self.boundary_outputs(self.line_boundaries))
        return {
            "construction": "line-ring",
            "pump": self.pump.to_dict(),
            "boundary_configuration": [self.pump.sa, self.pump.sb, self.pump.sa, self.pump.sb],
            "boundary_outputs": [list(v) for v in vectors],
            "line_phases": len(self.line_boundaries) - 1,
            "ring_phases": len(self.ring_boundaries) - 1,
            "line_fairness": self.line_fairness.to_dict(),
            "ring_fairness": self.ring_fairness.to_dict(),
            "passed": self.passed,
        }


LINE_PHASES = [(0, 1), (2, 1), (2, 3)]
RING_PHASES = LINE_PHASES + [(0, 3)]


def _pumped_execution(protocol: Protocol, graph: Graph, pump: PumpPair, schedule: list[tuple[int, int]],
                      phases: int, cycles: int) -> tuple[list[tuple[int, int]], list[Configuration], FairnessReport]:
    gap = pump.j - pump.i
    expected = (pump.sa, pump.sb, pump.sa, pump.sb)
    # initial phases bring (0, 1) and then (2, 3) to (sa, sb)
    script = []
    for u, w in ((0, 1), (2, 3)):
        script += _drive(u, w, 0, pump.i)
        script += _drive(u, w, pump.i, pump.i + cycles * gap)

    config = protocol.initial_configuration(graph.n)
    for pair in script:
        config = step(protocol, graph, config, pair)
    if config != expected:
        raise ConstructionError(f"initial phases on {graph} ended in {config}, expected {expected}")

    boundaries = [config]
    period: list[tuple[int, int]] = []
    for phase in range(phases):
        u, w = schedule[phase % len(schedule)]
        interactions = _drive(u, w, pump.i, pump.i + cycles * gap)
        for pair in interactions:
            config = step(protocol, graph, config, pair)
        if config != expected:
            raise ConstructionError(f"phase {phase} on {graph} did not return to (sa, sb): {config}")
        boundaries.append(config)
        script += interactions
        if phase < len(schedule):
            period += interactions
    return script, boundaries, fairness_audit(period, graph)


def build_line_ring_executions(protocol: Protocol, phases: int = 12, cycles: int = 2) -> LineRingResult:
    """Periodic weakly fair executions on line(4) and ring(4) whose phase boundaries coincide."""
    if phases < len(RING_PHASES):
        raise ValueError(f"need at least {len(RING_PHASES)} phases to cover every edge, got {phases}")
    pump = find_pump_pair(protocol, aligned=True)
    line, ring = line_graph(4), ring_graph(4)
    line_script, line_boundaries, line_fair = _pumped_execution(protocol, line, pump, LINE_PHASES, phases, cycles)
    ring_script, ring_boundaries, ring_fair = _pumped_execution(protocol, ring, pump, RING_PHASES, phases, cycles)
    return LineRingResult(
        pump=pump,
        outputs=protocol.outputs,
        line_trace=execute_script(protocol, line, line_script, spec="script:pumped"),
        ring_trace=execute_script(protocol, ring, ring_script, spec="script:pumped"),
        line_boundaries=line_boundaries,
        ring_boundaries=ring_boundaries,
        line_fairness=line_fair,
        ring_fairness=ring_fair,
        ring=ring,
    )


# === BIPARTITE ===

SIX_RING_EDGES = [(0, 1), (1, 5), (5, 3), (3, 4), (4, 2), (2, 0)]


@dataclass(frozen=True)
class BipartiteTriple:
    triangle: Graph
    six_ring: Graph
    doubled_triangle: Graph

    def oracle_checks(self) -> dict[str, bool]:
        return {
            "triangle_bipartite": is_bipartite(self.triangle),
            "six_ring_bipartite": is_bipartite(self.six_ring),
            "doubled_triangle_bipartite": is_bipartite(self.doubled_triangle),
        }

    @property
    def passed(self) -> bool:
        checks = self.oracle_checks()
        return (checks["six_ring_bipartite"] and not checks["triangle_bipartite"]
                and not checks["doubled_triangle_bipartite"])


def build_bipartite_triple() -> BipartiteTriple:
    triangle = complete_graph(3)
    triangle = Graph(n=3, edges=triangle.edges, label="triangle")
    six_ring = Graph.from_edges(6, SIX_RING_EDGES, label="six-ring")
    return BipartiteTriple(triangle, six_ring, double_graph(triangle).doubled)


def map_triangle_interaction(x: int, y: int) -> list[tuple[int, int]]:
    """Two six-ring interactions standing in for one triangle interaction."""
    if x == PIVOT or y == PIVOT:
        return [(x, y), (x + 3, y + 3)]
    return [(x, y + 3), (x + 3, y)]


@dataclass
class TriangleRingResult:
    triple: BipartiteTriple
    triangle_trace: Trace
    ring_trace: Trace
    witness: EquivalenceWitness
    fairness: FairnessReport

    @property
    def passed(self) -> bool:
        return self.witness.holds and self.fairness.fair

    def to_dict(self) -> dict:
        return {
            "construction": "triangle-to-ring",
            "steps": self.triangle_trace.step_count,
            "oracles": self.triple.oracle_checks(),
            "witness": self.witness.to_dict(),
            "fairness": self.fairness.to_dict(),
            "passed": self.passed,
        }


def build_triangle_to_ring_execution(protocol: Protocol, steps: int = 10_000,
                                     scheduler=None) -> TriangleRingResult:
    """Drive the triangle (round-robin unless a scheduler is given) and mirror it on the six-ring."""
    triple = build_bipartite_triple()
    triangle, ring = triple.triangle, triple.six_ring
    scheduler = scheduler or RoundRobinScheduler()

    config = protocol.initial_configuration(3)
    mirror = protocol.initial_configuration(6)
    witness = EquivalenceWitness(3)
    witness.record(0, config, mirror)
    base_script: list[tuple[int, int]] = []
    ring_script: list[tuple[int, int]] = []
    for t in range(steps):
        x, y = scheduler.next(triangle, t)
        config = step(protocol, triangle, config, (x, y))
        mapped = map_triangle_interaction(x, y)
        for pair in mapped:
            mirror = step(protocol, ring, mirror, pair)
        if not witness.record(t + 1, config, mirror):
            raise ConstructionError(f"step {t}: six-ring configuration is not equivalent to the triangle")
        base_script.append((x, y))
        ring_script.extend(mapped)

    return TriangleRingResult(
        triple=triple,
        triangle_trace=execute_script(protocol, triangle, base_script, spec=scheduler.spec),
        ring_trace=execute_script(protocol, ring, ring_script, spec="script:six-ring"),
        witness=witness,
        fairness=fairness_audit(ring_script, ring),
    )


# === ARBITRARY INITIAL STATES ===

@dataclass
class EdgeRemovalReport:
    protocol: str
    graph: Graph
    reduced: Graph
    edge: tuple[int, int]
    base_verdict: str
    base_steps: int
    copied: Configuration
    method: str
    stable: bool
    graph_in_class: bool | None
    reduced_in_class: bool | None
    base_trace: Trace | None = None

    @property
    def output(self) -> str | None:
        return self.base_verdict[len("converged("):-1] if self.base_verdict.startswith("converged") else None

    @property
    def passed(self) -> bool:
        """Same stable output on two graphs the oracle tells apart."""
        return self.stable and self.graph_in_class is not None and self.graph_in_class != self.reduced_in_class

    def to_dict(self) -> dict:
        return {
            "construction": "arbitrary-init",
            "protocol": self.protocol,
            "graph": self.graph.label,
            "reduced": self.reduced.label,
            "edge": list(self.edge),
            "base_verdict": self.base_verdict,
            "base_steps": self.base_steps,
            "copied": list(self.copied),
            "method": self.method,
            "stable": self.stable,
            "graph_in_class": self.graph_in_class,
            "reduced_in_class": self.reduced_in_class,
            "passed": self.passed,
        }


def edge_removal_counterexample(protocol: Protocol, g: Graph, edge: tuple[int, int], seed: int = 0,
                                max_steps: int = 1_000_000, window: int | None = None,
                                cap: int = 10_000_000, record: bool = False) -> EdgeRemovalReport:
    """Converge on `g`, copy the configuration onto g minus `edge`, and check it is still stable there.

    With `record`, the converging run on `g` is kept as `base_trace`.
    """
    reduced = g.without_edge(*edge)
    window = min(window or max(1, ARBITRARY_INIT_WINDOW_FACTOR * g.m), max_steps)
    base = run(protocol, g, RandomScheduler(seed), max_steps=max_steps, window=window, record=record,
               confirm_cap=min(cap, ARBITRARY_INIT_CONFIRM_CAP))
    if not base.converged:
        raise BudgetExceeded(f"{protocol.spec} did not converge on {g} within {max_steps:,} steps")

    copied = base.final
    try:
        stable = is_stable_configuration(protocol, reduced, copied, cap)
        method = "exhaustive"
    except CapExceeded:
        logger.warning("reachable set on %s exceeds cap %d; checking by simulation", reduced, cap)
        target = uniform_output(protocol, copied)
        changed: list[int] = []

        def watch(step_index: int, config: Configuration) -> None:
            if not changed and uniform_output(protocol, config) != target:
                changed.append(step_index)

        run(protocol, reduced, RandomScheduler(seed + 1), max_steps=max_steps, window=max_steps,
            monitors=[watch], record=False, initial=copied)
        stable = target is not None and not changed
        method = "simulation"

    oracle = class_oracle(protocol)
    return EdgeRemovalReport(
        protocol=protocol.spec,
        graph=g,
        reduced=reduced,
        edge=(min(edge), max(edge)),
        base_verdict=base.verdict,
        base_steps=base.step_count,
        copied=copied,
        method=method,
        stable=stable,
        graph_in_class=oracle(g) if oracle else None,
        reduced_in_class=oracle(reduced) if oracle else None,
        base_trace=base if record else None,
    )
