"""Communication graphs: construction from spec strings, class oracles and the edge-list file format."""

import itertools
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path

import networkx as nx
import numpy as np

from .errors import GraphError, SpecError

logger = logging.getLogger(__name__)

MAX_ATTEMPTS = 10_000


@dataclass(frozen=True)
class Graph:
    """A simple undirected connected graph on agents 0..n-1.

    `edges` holds canonical pairs (u, v) with u < v in sorted order; `adjacency`
    is derived from it. Instances are immutable and safe to share.
    """
    n: int
    edges: tuple[tuple[int, int], ...]
    label: str = field(default="", compare=False)
    adjacency: tuple[tuple[int, ...], ...] = field(init=False, compare=False, repr=False)
    _edge_set: frozenset = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        if self.n < 1:
            raise GraphError(f"a graph needs at least one agent, got n={self.n}")
        seen: set[tuple[int, int]] = set()
        for u, v in self.edges:
            if u == v:
                raise GraphError(f"self-loop at agent {u}")
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise GraphError(f"edge ({u}, {v}) out of range for n={self.n}")
            if u > v:
                raise GraphError(f"edge ({u}, {v}) is not canonical (u < v)")
            if (u, v) in seen:
                raise GraphError(f"duplicate edge ({u}, {v})")
            seen.add((u, v))
        if list(self.edges) != sorted(self.edges):
            raise GraphError("edge list is not sorted")

        neighbors: list[list[int]] = [[] for _ in range(self.n)]
        for u, v in self.edges:
            neighbors[u].append(v)
            neighbors[v].append(u)
        object.__setattr__(self, "adjacency", tuple(tuple(sorted(a)) for a in neighbors))
        object.__setattr__(self, "_edge_set", frozenset(seen))

        if not nx.is_connected(self.to_networkx()):
            raise GraphError(f"graph {self.label or ''} is not connected".replace("  ", " "))

    @classmethod
    def from_edges(cls, n: int, edges, label: str = "") -> "Graph":
        """Build a graph from any iterable of pairs, canonicalizing orientation and order."""
        canonical = sorted((min(u, v), max(u, v)) for u, v in edges)
        return cls(n=n, edges=tuple(canonical), label=label)

    @property
    def m(self) -> int:
        return len(self.edges)

    def has_edge(self, u: int, v: int) -> bool:
        return (min(u, v), max(u, v)) in self._edge_set

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    def degrees(self) -> list[int]:
        return [len(a) for a in self.adjacency]

    def ordered_pairs(self) -> list[tuple[int, int]]:
        """All 2|E| ordered adjacent pairs: edge-list order, (u, v) then (v, u)."""
        pairs = []
        for u, v in self.edges:
            pairs.append((u, v))
            pairs.append((v, u))
        return pairs

    def to_networkx(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(range(self.n))
        g.add_edges_from(self.edges)
        return g

    def with_edge(self, u: int, v: int, label: str | None = None) -> "Graph":
        if self.has_edge(u, v):
            raise GraphError(f"edge ({u}, {v}) already present")
        return Graph.from_edges(self.n, [*self.edges, (u, v)], label=label or f"{self.label}+add:{u}-{v}")

    def without_edge(self, u: int, v: int, label: str | None = None) -> "Graph":
        """Remove an edge; raises GraphError if the edge is absent or the result is disconnected."""
        if not self.has_edge(u, v):
            raise GraphError(f"edge ({u}, {v}) not present")
        key = (min(u, v), max(u, v))
        return Graph.from_edges(self.n, [e for e in self.edges if e != key],
                                label=label or f"{self.label}+del:{u}-{v}")

    def __str__(self) -> str:
        return self.label or f"graph(n={self.n}, m={self.m})"


# === GRAPH SPECS ===

# family -> parameter converters
_FAMILIES: dict[str, tuple] = {
    "line": (int,),
    "ring": (int,),
    "star": (int,),
    "complete": (int,),
    "tree": (int, int),
    "treechord": (int, int),
    "kregular": (int, int, int),
    "bipartite": (int, int, float, int),
    "petersen": (),
    "file": (str,),
}

_MUTATION = re.compile(r"^(add|del):(\d+)-(\d+)$")


@dataclass(frozen=True)
class GraphSpec:
    """A parsed constructor descriptor such as ``tree:10:7`` or ``ring:4+del:0-1``."""
    family: str
    params: tuple = ()
    mutations: tuple[tuple[str, int, int], ...] = ()

    def __str__(self) -> str:
        text = ":".join([self.family, *(str(p) for p in self.params)])
        for op, u, v in self.mutations:
            text += f"+{op}:{u}-{v}"
        return text


def parse_graph_spec(text: str) -> GraphSpec:
    """Parse ``family[:p1[:p2...]][+add:u-v|+del:u-v]...``."""
    text = text.strip()
    if not text:
        raise SpecError("empty graph spec")
    base, *suffixes = text.split("+")
    family, *raw = base.split(":", 1 if base.startswith("file:") else -1)
    family = family.lower()
    if family not in _FAMILIES:
        raise SpecError(f"unknown graph family {family!r} (known: {', '.join(sorted(_FAMILIES))})")
    converters = _FAMILIES[family]
    if len(raw) != len(converters):
        raise SpecError(f"graph family {family!r} takes {len(converters)} parameter(s), got {len(raw)}")
    try:
        params = tuple(conv(value) for conv, value in zip(converters, raw))
    except ValueError as e:
        raise SpecError(f"bad parameter in graph spec {text!r}: {e}") from e

    mutations = []
    for suffix in suffixes:
        match = _MUTATION.match(suffix.strip())
        if not match:
            raise SpecError(f"bad graph mutation {suffix!r} (expected add:u-v or del:u-v)")
        mutations.append((match.group(1), int(match.group(2)), int(match.group(3))))
    return GraphSpec(family=family, params=params, mutations=tuple(mutations))


def _rng(seed: int, attempt: int) -> np.random.Generator:
    # Sub-seeds are derived from (seed, attempt) so retries stay reproducible.
    return np.random.default_rng([seed, attempt])


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise GraphError(message)


def line_graph(n: int) -> Graph:
    _require(n >= 1, f"line needs n >= 1, got {n}")
    return Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)], label=f"line:{n}")


def ring_graph(n: int) -> Graph:
    _require(n >= 3, f"ring needs n >= 3, got {n}")
    return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)], label=f"ring:{n}")


def star_graph(n: int) -> Graph:
    _require(n >= 1, f"star needs n >= 1, got {n}")
    return Graph.from_edges(n, [(0, i) for i in range(1, n)], label=f"star:{n}")


def complete_graph(n: int) -> Graph:
    _require(n >= 1, f"complete needs n >= 1, got {n}")
    return Graph.from_edges(n, itertools.combinations(range(n), 2), label=f"complete:{n}")


def random_tree(n: int, seed: int) -> Graph:
    """Uniform labeled tree decoded from a random Prüfer sequence."""
    _require(n >= 1, f"tree needs n >= 1, got {n}")
    label = f"tree:{n}:{seed}"
    if n == 1:
        return Graph(n=1, edges=(), label=label)
    sequence = _rng(seed, 0).integers(0, n, size=n - 2).tolist()
    tree = nx.from_prufer_sequence(sequence)
    return Graph.from_edges(n, tree.edges(), label=label)


def tree_with_chord(n: int, seed: int) -> Graph:
    """A random tree plus one extra edge, i.e. a connected graph with exactly one cycle."""
    _require(n >= 3, f"treechord needs n >= 3, got {n}")
    tree = random_tree(n, seed)
    missing = [(u, v) for u, v in itertools.combinations(range(n), 2) if not tree.has_edge(u, v)]
    u, v = missing[int(_rng(seed, 1).integers(0, len(missing)))]
    return tree.with_edge(u, v, label=f"treechord:{n}:{seed}")


def random_regular(k: int, n: int, seed: int) -> Graph:
    """Connected k-regular graph from the pairing model, rejecting loops, multi-edges and disconnection."""
    _require(k >= 1, f"kregular needs k >= 1, got {k}")
    _require(n > k, f"kregular needs n > k, got n={n}, k={k}")
    _require((n * k) % 2 == 0, f"kregular needs n*k even, got n={n}, k={k}")
    _require(k > 1 or n == 2, f"a connected 1-regular graph has exactly 2 agents, got n={n}")
    label = f"kregular:{k}:{n}:{seed}"
    stubs = np.repeat(np.arange(n), k)
    for attempt in range(MAX_ATTEMPTS):
        paired = _rng(seed, attempt).permutation(stubs).reshape(-1, 2)
        edges = {(int(min(u, v)), int(max(u, v))) for u, v in paired}
        if len(edges) != len(paired) or any(u == v for u, v in edges):
            continue
        try:
            return Graph.from_edges(n, edges, label=label)
        except GraphError:
            continue
    raise GraphError(f"no connected simple {k}-regular graph on {n} agents after {MAX_ATTEMPTS} attempts")


def random_bipartite(a: int, b: int, p: float, seed: int) -> Graph:
    """Parts 0..a-1 and a..a+b-1; each cross edge present with probability p; disconnected draws rejected."""
    _require(a >= 1 and b >= 1, f"bipartite needs both parts non-empty, got a={a}, b={b}")
    _require(0.0 < p <= 1.0, f"bipartite needs 0 < p <= 1, got {p}")
    label = f"bipartite:{a}:{b}:{p}:{seed}"
    cross = [(u, a + v) for u in range(a) for v in range(b)]
    for attempt in range(MAX_ATTEMPTS):
        keep = _rng(seed, attempt).random(len(cross)) < p
        edges = [e for e, k in zip(cross, keep) if k]
        try:
            return Graph.from_edges(a + b, edges, label=label)
        except GraphError:
            continue
    raise GraphError(f"no connected bipartite({a}, {b}, {p}) draw after {MAX_ATTEMPTS} attempts")


def petersen_graph() -> Graph:
    return Graph.from_edges(10, nx.petersen_graph().edges(), label="petersen")


def generate(spec: GraphSpec | str) -> Graph:
    """Build the graph a spec describes, then apply its mutation suffixes in order."""
    if isinstance(spec, str):
        spec = parse_graph_spec(spec)
    builders = {
        "line": line_graph,
        "ring": ring_graph,
        "star": star_graph,
        "complete": complete_graph,
        "tree": random_tree,
        "treechord": tree_with_chord,
        "kregular": random_regular,
        "bipartite": random_bipartite,
        "petersen": petersen_graph,
        "file": read_graph_file,
    }
    graph = builders[spec.family](*spec.params)
    for op, u, v in spec.mutations:
        graph = graph.with_edge(u, v) if op == "add" else graph.without_edge(u, v)
    if graph.label != str(spec):
        graph = Graph(n=graph.n, edges=graph.edges, label=str(spec))
    logger.debug("generated %s (n=%d, m=%d)", graph.label, graph.n, graph.m)
    return graph


# === CLASS ORACLES ===

def is_tree(g: Graph) -> bool:
    """Acyclic (connectivity is a Graph invariant)."""
    return nx.is_tree(g.to_networkx())


def is_line(g: Graph) -> bool:
    return is_tree(g) and max(g.degrees(), default=0) <= 2


def is_ring(g: Graph) -> bool:
    """Every agent has degree 2."""
    return all(d == 2 for d in g.degrees())


def is_star(g: Graph) -> bool:
    """One internal agent adjacent to n-1 leaves; every graph with n <= 2 counts as a star."""
    if g.n <= 2:
        return True
    return g.m == g.n - 1 and max(g.degrees()) == g.n - 1


def is_kregular(g: Graph, k: int) -> bool:
    return all(d == k for d in g.degrees())


def is_bipartite(g: Graph) -> bool:
    return nx.is_bipartite(g.to_networkx())


def connected_inventory(max_n: int) -> list[Graph]:
    """Every connected graph with 1..max_n agents, one per isomorphism class (graph atlas, max_n <= 7)."""
    if not 1 <= max_n <= 7:
        raise GraphError(f"the graph atlas covers 1..7 agents, got max_n={max_n}")
    graphs = []
    for index, atlas_graph in enumerate(nx.graph_atlas_g()):
        n = atlas_graph.number_of_nodes()
        if n == 0 or n > max_n or not nx.is_connected(atlas_graph):
            continue
        graphs.append(Graph.from_edges(n, atlas_graph.edges(), label=f"atlas:{index}"))
    return graphs


# === EDGE-LIST FILE FORMAT ===

def parse_graph_file(data: bytes) -> Graph:
    """Parse ``"n m\\n"`` followed by m lines ``"u v\\n"`` (0-indexed, ASCII)."""
    try:
        text = data.decode("ascii")
    except UnicodeDecodeError as e:
        raise GraphError("graph file is not ASCII") from e
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise GraphError("graph file is empty")

    header = lines[0].split()
    if len(header) != 2 or not all(tok.isdigit() for tok in header):
        raise GraphError(f"malformed header {lines[0]!r} (expected 'n m')")
    n, m = int(header[0]), int(header[1])
    body = lines[1:]
    if len(body) != m:
        raise GraphError(f"header declares {m} edges but file has {len(body)} edge lines")

    edges = []
    for lineno, line in enumerate(body, start=2):
        parts = line.split()
        if len(parts) != 2 or not all(tok.isdigit() for tok in parts):
            raise GraphError(f"line {lineno}: malformed edge {line!r}")
        u, v = int(parts[0]), int(parts[1])
        if u >= n or v >= n:
            raise GraphError(f"line {lineno}: vertex id out of range for n={n}")
        edges.append((u, v))
    if len({(min(u, v), max(u, v)) for u, v in edges}) != len(edges):
        raise GraphError("duplicate edge in graph file")
    return Graph.from_edges(n, edges)


def write_graph_file(g: Graph) -> bytes:
    lines = [f"{g.n} {g.m}"] + [f"{u} {v}" for u, v in g.edges]
    return ("\n".join(lines) + "\n").encode("ascii")


def read_graph_file(path: str | Path) -> Graph:
    path = Path(path).expanduser()
    try:
        data = path.read_bytes()
    except OSError as e:
        raise GraphError(f"cannot read graph file {path}: {e}") from e
    graph = parse_graph_file(data)
    return Graph(n=graph.n, edges=graph.edges, label=f"file:{path}")
