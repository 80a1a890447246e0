"""Interaction sources: a globally fair random scheduler, weakly fair round-robin, and scripted replay."""

import json
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

from .engine import Interaction
from .errors import InvalidInteraction, ScriptExhausted, SpecError
from .graphs import Graph

BATCH = 4096


class RandomScheduler:
    """Each ordered adjacent pair with probability 1/(2|E|), drawn from a seeded numpy generator."""

    def __init__(self, seed: int = 0):
        self.seed = seed
        self.spec = f"random:{seed}"
        self._rng = np.random.default_rng(seed)
        self._pairs: list[tuple[int, int]] | None = None
        self._draws: list[int] = []
        self._pos = 0

    def next(self, graph: Graph, step_index: int) -> Interaction:
        if self._pairs is None:
            self._pairs = graph.ordered_pairs()
        if self._pos >= len(self._draws):
            self._draws = self._rng.integers(0, len(self._pairs), size=BATCH).tolist()
            self._pos = 0
        pair = self._pairs[self._draws[self._pos]]
        self._pos += 1
        return Interaction(*pair)


class RoundRobinScheduler:
    """Cycles through ordered pairs in canonical order: edge list order, (u, v) then (v, u).

    With ``oneway=True`` only (u, v) with u < v is used, so each edge interacts in one
    orientation only.
    """

    def __init__(self, oneway: bool = False):
        self.oneway = oneway
        self.seed = None
        self.spec = "rr:oneway" if oneway else "rr"
        self._pairs: list[tuple[int, int]] | None = None

    def sweep(self, graph: Graph) -> list[tuple[int, int]]:
        return list(graph.edges) if self.oneway else graph.ordered_pairs()

    def next(self, graph: Graph, step_index: int) -> Interaction:
        if self._pairs is None:
            self._pairs = self.sweep(graph)
        return Interaction(*self._pairs[step_index % len(self._pairs)])


class ScriptScheduler:
    """Replays a fixed interaction list, then signals ScriptExhausted."""

    def __init__(self, script: Iterable[tuple[int, int]], spec: str = "script"):
        self.script = [Interaction(int(a), int(b)) for a, b in script]
        self.seed = None
        self.spec = spec

    def validate(self, graph: Graph) -> None:
        for a, b in self.script:
            if a == b or not graph.has_edge(a, b):
                raise InvalidInteraction(a, b)

    def next(self, graph: Graph, step_index: int) -> Interaction:
        if step_index >= len(self.script):
            raise ScriptExhausted(step_index)
        return self.script[step_index]


def load_script(path: str | Path) -> list[tuple[int, int]]:
    """Read a JSON list of [initiator, responder] pairs."""
    path = Path(path).expanduser()
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise SpecError(f"cannot read script {path}: {e}") from e
    if not isinstance(data, list) or not all(isinstance(p, list) and len(p) == 2 for p in data):
        raise SpecError(f"script {path} must be a JSON list of [initiator, responder] pairs")
    return [(int(a), int(b)) for a, b in data]


def parse_scheduler_spec(text: str):
    """Build a scheduler from ``random:SEED``, ``rr``, ``rr:oneway`` or ``script:PATH``."""
    text = text.strip()
    kind, _, arg = text.partition(":")
    if kind == "random":
        try:
            seed = int(arg) if arg else 0
        except ValueError as e:
            raise SpecError(f"random scheduler seed must be an integer, got {arg!r}") from e
        if seed < 0:
            raise SpecError(f"random scheduler seed must be non-negative, got {seed}")
        return RandomScheduler(seed)
    if kind == "rr":
        if arg not in ("", "oneway"):
            raise SpecError(f"unknown round-robin variant {arg!r}")
        return RoundRobinScheduler(oneway=arg == "oneway")
    if kind == "script":
        if not arg:
            raise SpecError("script scheduler needs a path: script:PATH")
        return ScriptScheduler(load_script(arg), spec=text)
    raise SpecError(f"unknown scheduler {text!r} (expected random:SEED, rr, rr:oneway or script:PATH)")


@dataclass
class FairnessReport:
    """Per ordered pair occurrence counts, and the pairs that never occurred."""
    counts: dict[tuple[int, int], int]
    debt: list[tuple[int, int]]
    unordered_debt: list[tuple[int, int]]
    length: int

    @property
    def fair(self) -> bool:
        return not self.debt

    def to_dict(self) -> dict:
        return {
            "length": self.length,
            "counts": {f"{a}-{b}": c for (a, b), c in sorted(self.counts.items())},
            "debt": [list(p) for p in self.debt],
            "unordered_debt": [list(p) for p in self.unordered_debt],
        }


def fairness_audit(interactions: Iterable[tuple[int, int]], graph: Graph) -> FairnessReport:
    """Count each ordered adjacent pair in a finite interaction sequence.

    `debt` lists ordered pairs that never occur; `unordered_debt` lists edges that never
    occur in either orientation.
    """
    seen = Counter(tuple(p) for p in interactions)
    counts = {pair: seen.get(pair, 0) for pair in graph.ordered_pairs()}
    debt = [pair for pair, c in counts.items() if c == 0]
    unordered = [(u, v) for u, v in graph.edges if counts[(u, v)] + counts[(v, u)] == 0]
    return FairnessReport(counts, debt, unordered, sum(seen.values()))
