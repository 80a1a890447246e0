"""Protocol abstraction, stepping, convergence detection and exhaustive stability checks."""

import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, NamedTuple, Protocol as _Interface

import networkx as nx

from .errors import CapExceeded, InvalidInteraction, ScriptExhausted
from .graphs import Graph

logger = logging.getLogger(__name__)

YES = "yes"
NO = "no"

Configuration = tuple[int, ...]
Monitor = Callable[[int, Configuration], None]


class Interaction(NamedTuple):
    initiator: int
    responder: int


class Scheduler(_Interface):
    """Anything that hands out interactions; see `popgraph.schedulers`."""
    spec: str
    seed: int | None

    def next(self, graph: Graph, step_index: int) -> Interaction: ...


@dataclass(frozen=True)
class Protocol:
    """A deterministic population protocol (Q, Y, gamma, delta) with dense integer state ids.

    `table[p * state_count + q]` is the pair (p', q') produced when an initiator in
    state p meets a responder in state q.
    """
    name: str
    params: dict
    state_count: int
    initial: int
    table: tuple[tuple[int, int], ...]
    outputs: tuple[str, ...]
    weak_fair_compatible: bool = False
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        q = self.state_count
        if len(self.table) != q * q:
            raise ValueError(f"{self.name}: delta table has {len(self.table)} entries, expected {q * q}")
        if len(self.outputs) != q:
            raise ValueError(f"{self.name}: {len(self.outputs)} outputs for {q} states")
        if not 0 <= self.initial < q:
            raise ValueError(f"{self.name}: initial state {self.initial} out of range")
        for p2, q2 in self.table:
            if not (0 <= p2 < q and 0 <= q2 < q):
                raise ValueError(f"{self.name}: delta produces a state outside 0..{q - 1}")
        if any(y not in (YES, NO) for y in self.outputs):
            raise ValueError(f"{self.name}: outputs must be 'yes' or 'no'")

    @classmethod
    def from_rules(
        cls,
        name: str,
        params: dict,
        state_count: int,
        initial: int,
        rule: Callable[[int, int], tuple[int, int]],
        output: Callable[[int], str],
        weak_fair_compatible: bool = False,
        label: Callable[[int], str] | None = None,
    ) -> "Protocol":
        """Tabulate a transition function over all |Q|^2 ordered state pairs."""
        table = tuple(rule(p, q) for p in range(state_count) for q in range(state_count))
        outputs = tuple(output(s) for s in range(state_count))
        labels = tuple(label(s) for s in range(state_count)) if label else ()
        return cls(name, params, state_count, initial, table, outputs, weak_fair_compatible, labels)

    def delta(self, p: int, q: int) -> tuple[int, int]:
        return self.table[p * self.state_count + q]

    def gamma(self, state: int) -> str:
        return self.outputs[state]

    def initial_state(self, agent: int, n: int) -> int:
        return self.initial

    def initial_configuration(self, n: int) -> Configuration:
        return tuple(self.initial_state(a, n) for a in range(n))

    def label(self, state: int) -> str:
        return self.labels[state] if self.labels else str(state)

    def output_vector(self, config: Configuration) -> tuple[str, ...]:
        return tuple(self.outputs[s] for s in config)

    def symmetry_violations(self) -> list[tuple[int, int]]:
        """Ordered pairs (p, q), p != q, whose transition is not mirrored by (q, p)."""
        bad = []
        for p in range(self.state_count):
            for q in range(self.state_count):
                if p == q:
                    continue
                p2, q2 = self.delta(p, q)
                if self.delta(q, p) != (q2, p2):
                    bad.append((p, q))
        return bad

    @property
    def spec(self) -> str:
        """Canonical spec string accepted by `protocols.parse_protocol_spec`."""
        if not self.params:
            return self.name
        parts = []
        for key, value in self.params.items():
            if isinstance(value, bool):
                if value:
                    parts.append(key)
            else:
                parts.append(f"{key}={value}")
        return f"{self.name}:{','.join(parts)}"


def null_protocol(output: str = YES, name: str = "null") -> Protocol:
    """One state, identity delta, constant output."""
    return Protocol(name=name, params={}, state_count=1, initial=0, table=((0, 0),), outputs=(output,),
                    weak_fair_compatible=True, labels=(output,))


def uniform_output(protocol: Protocol, config: Configuration) -> str | None:
    """The output every agent shares, or None when outputs differ."""
    first = protocol.outputs[config[0]]
    for s in config:
        if protocol.outputs[s] != first:
            return None
    return first


# === STEPPING ===

def step(protocol: Protocol, graph: Graph, config: Configuration, interaction: tuple[int, int]) -> Configuration:
    """Apply one interaction; only the two participants change."""
    a, b = interaction
    if a == b or not graph.has_edge(a, b):
        raise InvalidInteraction(a, b)
    pa, pb = protocol.delta(config[a], config[b])
    if pa == config[a] and pb == config[b]:
        return config
    states = list(config)
    states[a], states[b] = pa, pb
    return tuple(states)


@dataclass(frozen=True)
class Step:
    i: int
    initiator: int
    responder: int
    after_initiator: int
    after_responder: int

    def to_dict(self) -> dict:
        return {
            "i": self.i,
            "init": self.initiator,
            "resp": self.responder,
            "after": {str(self.initiator): self.after_initiator, str(self.responder): self.after_responder},
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Step":
        u, v = int(data["init"]), int(data["resp"])
        after = data["after"]
        return cls(int(data["i"]), u, v, int(after[str(u)]), int(after[str(v)]))


@dataclass
class Trace:
    """Everything one run produced: interactions, sampled outputs and the verdict."""
    protocol: str
    params: dict
    graph: str
    scheduler: str
    seed: int | None
    initial: Configuration
    steps: list[Step] = field(default_factory=list)
    outputs: list[tuple[int, str]] = field(default_factory=list)
    verdict: str = "timeout"
    step_count: int = 0
    final: Configuration = ()
    converged_at: int | None = None
    confirmed: bool = False

    @property
    def converged(self) -> bool:
        return self.verdict.startswith("converged")

    @property
    def output(self) -> str | None:
        """The converged output ('yes'/'no'), or None."""
        if not self.converged:
            return None
        return self.verdict[len("converged("):-1]

    def interactions(self) -> list[Interaction]:
        return [Interaction(s.initiator, s.responder) for s in self.steps]

    def to_dict(self) -> dict:
        return {
            "protocol": self.protocol,
            "params": self.params,
            "graph": self.graph,
            "scheduler": self.scheduler,
            "seed": self.seed,
            "initial": list(self.initial),
            "steps": [s.to_dict() for s in self.steps],
            "outputs": [{"i": i, "vector": v} for i, v in self.outputs],
            "verdict": self.verdict,
            "step_count": self.step_count,
            "final": list(self.final),
            "confirmed": self.confirmed,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Trace":
        return cls(
            protocol=data["protocol"],
            params=data.get("params", {}),
            graph=data["graph"],
            scheduler=data["scheduler"],
            seed=data.get("seed"),
            initial=tuple(data.get("initial", ())),
            steps=[Step.from_dict(s) for s in data["steps"]],
            outputs=[(o["i"], o["vector"]) for o in data.get("outputs", [])],
            verdict=data["verdict"],
            step_count=data.get("step_count", len(data["steps"])),
            final=tuple(data.get("final", ())),
            confirmed=bool(data.get("confirmed", False)),
        )

    def verify_replay(self, protocol: Protocol, graph: Graph) -> int | None:
        """Replay the recorded interactions; return the index of the first mismatching step, or None."""
        config = self.initial or protocol.initial_configuration(graph.n)
        for s in self.steps:
            config = step(protocol, graph, config, (s.initiator, s.responder))
            if config[s.initiator] != s.after_initiator or config[s.responder] != s.after_responder:
                return s.i
        if self.final and self.steps and tuple(self.final) != config:
            return self.steps[-1].i
        return None


def _vector(protocol: Protocol, config: Configuration) -> str:
    return "".join("y" if protocol.outputs[s] == YES else "n" for s in config)


def confirm_stable(protocol: Protocol, graph: Graph, config: Configuration, cap: int) -> bool | None:
    """Exhaustive stability of `config`, or None when its reachable set outgrows `cap`."""
    try:
        return is_stable_configuration(protocol, graph, config, cap=cap)
    except CapExceeded:
        return None


def run(
    protocol: Protocol,
    graph: Graph,
    scheduler: Scheduler,
    max_steps: int,
    window: int,
    monitors: Iterable[Monitor] = (),
    record: bool = True,
    initial: Configuration | None = None,
    confirm_cap: int | None = None,
    extended_factor: int = 1,
) -> Trace:
    """Step until outputs are uniform and unchanged for `window` steps, or `max_steps` is reached.

    With `confirm_cap`, a quiet configuration is only accepted once `is_stable_configuration`
    proves it (searching at most `confirm_cap` configurations). A configuration that can still
    change its output keeps the run going. When the search outgrows the cap, or no cap is
    given, outputs must stay quiet for ``window * extended_factor`` steps instead, and the
    verdict is recorded as unconfirmed.

    Monitors are called as ``monitor(step_index, configuration)`` after every step.
    A scripted scheduler that runs dry ends the run with verdict ``end-of-script``.
    """
    if not 1 <= window <= max_steps:
        raise ValueError(f"need max_steps >= window >= 1, got max_steps={max_steps}, window={window}")
    if extended_factor < 1:
        raise ValueError(f"extended_factor must be >= 1, got {extended_factor}")
    monitors = tuple(monitors)
    config = tuple(initial) if initial is not None else protocol.initial_configuration(graph.n)
    if len(config) != graph.n:
        raise ValueError(f"configuration has {len(config)} agents, graph has {graph.n}")

    trace = Trace(
        protocol=protocol.name,
        params=dict(protocol.params),
        graph=graph.label,
        scheduler=scheduler.spec,
        seed=scheduler.seed,
        initial=config,
    )
    outputs = protocol.outputs
    yes_count = sum(1 for s in config if outputs[s] == YES)
    last_change = 0
    required = gap = window
    patience = window * extended_factor
    trace.outputs.append((0, _vector(protocol, config)))
    logger.debug("run %s on %s with %s (max_steps=%d, window=%d, confirm_cap=%s)",
                 protocol.spec, graph, scheduler.spec, max_steps, window, confirm_cap)

    if graph.m == 0:
        trace.verdict = f"converged({outputs[config[0]]})"
        trace.final = config
        trace.converged_at = 0
        trace.confirmed = True
        return trace

    t = 0
    while t < max_steps:
        try:
            a, b = scheduler.next(graph, t)
        except ScriptExhausted:
            trace.verdict = "end-of-script"
            break
        before = config
        config = step(protocol, graph, config, (a, b))
        if config is not before:
            sa, sb, pa, pb = before[a], before[b], config[a], config[b]
            if outputs[pa] != outputs[sa] or outputs[pb] != outputs[sb]:
                yes_count += (outputs[pa] == YES) - (outputs[sa] == YES) + (outputs[pb] == YES) - (outputs[sb] == YES)
                last_change = t + 1
                required = gap = window
        t += 1
        if record:
            trace.steps.append(Step(t - 1, a, b, config[a], config[b]))
        for monitor in monitors:
            monitor(t - 1, config)
        if t % window == 0:
            trace.outputs.append((t, _vector(protocol, config)))
        if (yes_count == 0 or yes_count == graph.n) and t - last_change >= required:
            settled = None
            if confirm_cap is not None:
                settled = confirm_stable(protocol, graph, config, confirm_cap)
            # back off between searches while the outputs stay quiet
            if settled is False:
                logger.debug("outputs quiet since step %d but the configuration is not stable", last_change)
                required = t - last_change + gap
                gap *= 2
                continue
            if settled is None and t - last_change < patience:
                required = min(t - last_change + gap, patience)
                gap *= 2
                continue
            trace.verdict = f"converged({YES if yes_count else NO})"
            trace.converged_at = last_change
            trace.confirmed = bool(settled)
            break

    trace.step_count = t
    trace.final = config
    logger.debug("run finished: %s after %d steps (confirmed=%s)", trace.verdict, t, trace.confirmed)
    return trace


def execute_script(
    protocol: Protocol,
    graph: Graph,
    script: Iterable[tuple[int, int]],
    initial: Configuration | None = None,
    spec: str = "script",
) -> Trace:
    """Run a fixed interaction list to its end and record it as a trace (verdict ``end-of-script``)."""
    config = tuple(initial) if initial is not None else protocol.initial_configuration(graph.n)
    trace = Trace(protocol=protocol.name, params=dict(protocol.params), graph=graph.label,
                  scheduler=spec, seed=None, initial=config, verdict="end-of-script")
    trace.outputs.append((0, _vector(protocol, config)))
    for i, (a, b) in enumerate(script):
        config = step(protocol, graph, config, (a, b))
        trace.steps.append(Step(i, a, b, config[a], config[b]))
    trace.step_count = len(trace.steps)
    trace.final = config
    trace.outputs.append((trace.step_count, _vector(protocol, config)))
    return trace


def iter_configurations(
    protocol: Protocol,
    graph: Graph,
    interactions: Iterable[tuple[int, int]],
    initial: Configuration | None = None,
) -> Iterator[Configuration]:
    """Yield the configuration after each interaction (the initial one first)."""
    config = tuple(initial) if initial is not None else protocol.initial_configuration(graph.n)
    yield config
    for interaction in interactions:
        config = step(protocol, graph, config, interaction)
        yield config


def replay(
    protocol: Protocol,
    graph: Graph,
    interactions: Iterable[tuple[int, int]],
    initial: Configuration | None = None,
) -> Configuration:
    config = None
    for config in iter_configurations(protocol, graph, interactions, initial):
        pass
    return config


# === EXHAUSTIVE ANALYSIS ===

@dataclass
class ReachableSet:
    """Reachable configurations (index = discovery order) and the successor relation between them."""
    configurations: list[Configuration]
    index: dict[Configuration, int]
    edges: set[tuple[int, int]]

    def __len__(self) -> int:
        return len(self.configurations)

    def __contains__(self, config) -> bool:
        return tuple(config) in self.index

    def digraph(self) -> nx.DiGraph:
        g = nx.DiGraph()
        g.add_nodes_from(range(len(self.configurations)))
        g.add_edges_from(self.edges)
        return g


def _successors(protocol: Protocol, pairs: list[tuple[int, int]], config: Configuration) -> Iterator[Configuration]:
    for a, b in pairs:
        sa, sb = config[a], config[b]
        pa, pb = protocol.delta(sa, sb)
        if pa == sa and pb == sb:
            continue
        states = list(config)
        states[a], states[b] = pa, pb
        yield tuple(states)


def enumerate_reachable(protocol: Protocol, graph: Graph, start: Configuration | None = None,
                        cap: int = 10_000_000) -> ReachableSet:
    """Breadth-first search over single-interaction successors (both orientations of every edge).

    Self-loops (null transitions) are not recorded. Raises CapExceeded once more than
    `cap` configurations have been discovered.
    """
    start = tuple(start) if start is not None else protocol.initial_configuration(graph.n)
    pairs = graph.ordered_pairs()
    configurations = [start]
    index = {start: 0}
    edges: set[tuple[int, int]] = set()
    queue = deque([0])
    while queue:
        i = queue.popleft()
        for succ in _successors(protocol, pairs, configurations[i]):
            j = index.get(succ)
            if j is None:
                j = len(configurations)
                if j >= cap:
                    raise CapExceeded(cap, j + 1)
                index[succ] = j
                configurations.append(succ)
                queue.append(j)
            edges.add((i, j))
    logger.debug("reachable set of %s on %s: %d configurations, %d transitions",
                 protocol.spec, graph, len(configurations), len(edges))
    return ReachableSet(configurations, index, edges)


@dataclass
class StabilityReport:
    protocol: str
    graph: str
    reachable_count: int
    verdict: str
    components: list[dict]
    witness: Configuration | None = None

    @property
    def output(self) -> str | None:
        return {"all-yes-stable": YES, "all-no-stable": NO}.get(self.verdict)

    def to_dict(self) -> dict:
        return {
            "protocol": self.protocol,
            "graph": self.graph,
            "reachable_count": self.reachable_count,
            "verdict": self.verdict,
            "bottom_sccs": self.components,
            "witness": list(self.witness) if self.witness is not None else None,
        }


def check_stable(protocol: Protocol, graph: Graph, cap: int = 10_000_000,
                 start: Configuration | None = None) -> StabilityReport:
    """Classify the long-run behaviour of globally fair executions via bottom SCCs.

    Verdicts:
      all-yes-stable / all-no-stable: every bottom SCC holds only configurations with that uniform output.
      mixed: every bottom SCC is uniform, but some say yes and some say no.
      not-convergent: some bottom SCC contains a non-uniform configuration or both outputs.
    """
    reachable = enumerate_reachable(protocol, graph, start, cap)
    components = []
    witness = None
    labels = set()
    for component in nx.attracting_components(reachable.digraph()):
        members = sorted(component)
        seen = {uniform_output(protocol, reachable.configurations[i]) or "mixed" for i in members}
        label = seen.pop() if len(seen) == 1 else "mixed"
        labels.add(label)
        components.append({"size": len(members), "output": label,
                           "sample": list(reachable.configurations[members[0]])})
        if label == "mixed" and witness is None:
            witness = next((reachable.configurations[i] for i in members
                            if uniform_output(protocol, reachable.configurations[i]) is None),
                           reachable.configurations[members[0]])
    components.sort(key=lambda c: (c["output"], -c["size"], c["sample"]))

    if labels == {YES}:
        verdict = "all-yes-stable"
    elif labels == {NO}:
        verdict = "all-no-stable"
    elif "mixed" in labels:
        verdict = "not-convergent"
    else:
        verdict = "mixed"
        witness = next(tuple(c["sample"]) for c in components if c["output"] == NO)
    return StabilityReport(protocol.spec, graph.label, len(reachable), verdict, components, witness)


def is_stable_configuration(protocol: Protocol, graph: Graph, config: Configuration,
                            cap: int = 10_000_000) -> bool:
    """True iff all agents share one output in `config` and every reachable configuration keeps it."""
    config = tuple(config)
    target = uniform_output(protocol, config)
    if target is None:
        return False
    pairs = graph.ordered_pairs()
    seen = {config}
    queue = deque([config])
    while queue:
        current = queue.popleft()
        for succ in _successors(protocol, pairs, current):
            if succ in seen:
                continue
            if uniform_output(protocol, succ) != target:
                return False
            if len(seen) >= cap:
                raise CapExceeded(cap, len(seen) + 1)
            seen.add(succ)
            queue.append(succ)
    return True
