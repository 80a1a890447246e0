"""Transition tables for tree, k-regular and star identification, plus invariant probes.

Each protocol is written as a first-match rule list over structured states and then
tabulated into a dense `engine.Protocol`. Structured states map to ids lexicographically
over their field domains.
"""

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product
from typing import Callable

from .engine import NO, YES, Configuration, Protocol
from .errors import SpecError
from .graphs import Graph, is_kregular, is_star, is_tree

logger = logging.getLogger(__name__)


class StateCodec:
    """Bijection between tuples over ordered field domains and dense ids (lexicographic)."""

    def __init__(self, fields: list[tuple[str, tuple]]):
        self.names = [name for name, _ in fields]
        self.domains = [tuple(domain) for _, domain in fields]
        self._states = list(product(*self.domains))
        self._ids = {state: i for i, state in enumerate(self._states)}

    @property
    def size(self) -> int:
        return len(self._states)

    def encode(self, *values) -> int:
        try:
            return self._ids[tuple(values)]
        except KeyError:
            raise ValueError(f"{values!r} is not a state over {self.names}") from None

    def decode(self, state: int) -> tuple:
        return self._states[state]

    def label(self, state: int) -> str:
        return "(" + ",".join(str(v) for v in self._states[state]) + ")"


# === TREE IDENTIFICATION ===

L, LL, LR = "L", "Ll", "Lr"
LT_SE, LT_SE2, L_SE2 = "Ltse", "Ltse'", "Lse'"
LT_L, LT_R = "Ltl", "Ltr"
PHI, PHI2 = "phi", "phi'"

TI_TOKENS = (L, LL, LR, LT_SE, LT_SE2, L_SE2, LT_L, LT_R, PHI)
TI_LEADER = frozenset({L, LT_SE, LT_SE2, L_SE2})
TI_RIGHT = frozenset({LR, LT_R})
TI_LEFT = frozenset({LL, LT_L})
UNTRIAL = {LT_L: LL, LT_R: LR}

TI_CODEC = StateCodec([("lf", TI_TOKENS), ("tre", (YES, NO))])


def _ti_rule(a: tuple[str, str], b: tuple[str, str]) -> tuple[tuple[str, str], tuple[str, str]]:
    lf_a, tre_a = a
    lf_b, tre_b = b

    # token election
    if lf_a in TI_RIGHT and lf_b in TI_RIGHT:
        return (lf_a, tre_a), (LL, tre_b)
    if lf_a in TI_LEFT and lf_b in TI_LEFT:
        return (lf_a, tre_a), (L, tre_b)
    if lf_a in TI_LEADER and lf_b in TI_LEADER:
        return (L, YES), (PHI, tre_b)

    # token movement
    if lf_a != PHI and lf_b == PHI:
        if lf_a in TI_LEADER:
            tre_b = tre_a
        if lf_a in UNTRIAL:
            lf_a = UNTRIAL[lf_a]
        elif lf_a in (L_SE2, LT_SE2):
            lf_a = L
        return (lf_b, tre_a), (lf_a, tre_b)

    # trials
    if lf_a == L and lf_b == LL:
        return (LT_L, tre_a), (L_SE2, tre_a)
    if lf_a == L_SE2 and lf_b == LR:
        return (LT_R, tre_a), (LT_SE, tre_a)
    if lf_a == LT_SE and lf_b == LT_L:
        return (LL, tre_a), (LT_SE2, tre_a)
    if lf_a == LT_SE2 and lf_b == LT_R:
        return (LR, tre_a), (L, NO)

    # two tokens meet: abort any trial and exchange
    if lf_a != PHI and lf_b != PHI:
        if lf_a in TI_LEADER:
            tre_b = tre_a
        elif lf_b in TI_LEADER:
            tre_a = tre_b
        lf_a, lf_b = (UNTRIAL.get(lf, lf) for lf in (lf_a, lf_b))
        lf_a, lf_b = (L if lf in (L_SE2, LT_SE, LT_SE2) else lf for lf in (lf_a, lf_b))
        return (lf_b, tre_a), (lf_a, tre_b)

    return a, b


def tree_id() -> Protocol:
    """Tree identification: 18 states, every agent starts as (Lr, yes), output is tre."""
    codec = TI_CODEC

    def rule(p: int, q: int) -> tuple[int, int]:
        a, b = _ti_rule(codec.decode(p), codec.decode(q))
        return codec.encode(*a), codec.encode(*b)

    return Protocol.from_rules(
        name="tree-id",
        params={},
        state_count=codec.size,
        initial=codec.encode(LR, YES),
        rule=rule,
        output=lambda s: codec.decode(s)[1],
        label=codec.label,
    )


@dataclass(frozen=True)
class TokenCensus:
    """Agents holding a right token, a left token and a leader token (trial variants included)."""
    right: int
    left: int
    leader: int

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.right, self.left, self.leader)


def token_census(config: Configuration) -> TokenCensus:
    right = left = leader = 0
    for state in config:
        lf = TI_CODEC.decode(state)[0]
        if lf in TI_RIGHT:
            right += 1
        elif lf in TI_LEFT:
            left += 1
        elif lf in TI_LEADER:
            leader += 1
    return TokenCensus(right, left, leader)


# === K-REGULAR IDENTIFICATION ===

def _level_top(bound: int) -> int:
    return bound.bit_length() - 1


@lru_cache(maxsize=None)
def kri_codec(k: int, bound: int) -> StateCodec:
    tokens = tuple(f"L{x}" for x in range(k + 1)) + (PHI, PHI2)
    return StateCodec([
        ("lf", tokens),
        ("level", tuple(range(_level_top(bound) + 1))),
        ("loc", (YES, NO)),
        ("reg", (YES, NO)),
    ])


def _kri_rule(k: int, top: int, a: tuple, b: tuple) -> tuple[tuple, tuple]:
    lf_a, level_a, loc_a, reg_a = a
    lf_b, level_b, loc_b, reg_b = b
    token_a = lf_a.startswith("L")
    token_b = lf_b.startswith("L")
    x = int(lf_a[1:]) if token_a else -1

    if level_a == level_b:
        if token_a and token_b:
            level_a = min(level_a + 1, top)
            lf_a, lf_b = "L0", PHI
            reg_a = loc_a = NO
        elif token_a and x <= k - 2 and lf_b == PHI:
            lf_a, lf_b = f"L{x + 1}", PHI2
        elif token_a and lf_b == PHI2:
            lf_a, lf_b = PHI, "L0"
            reg_b = reg_a
        elif token_a and x == k - 1 and lf_b == PHI:
            lf_a, lf_b = f"L{k}", PHI2
            if loc_a == NO:
                reg_a = loc_a = YES
        elif token_a and x == k and lf_b == PHI:
            lf_a, lf_b = "L0", PHI2
            reg_a = NO
        if loc_a == NO or loc_b == NO:
            reg_a = reg_b = NO
    elif level_a > level_b:
        level_b = level_a
        loc_b = NO
        lf_b = PHI
    return (lf_a, level_a, loc_a, reg_a), (lf_b, level_b, loc_b, reg_b)


def kreg_id(k: int, bound: int, bound_is_exact_n: bool = False) -> Protocol:
    """k-regular identification with levels 0..floor(log2 bound); output is reg.

    A leader merge at the top level keeps the level at the top, which only happens
    when `bound` underestimates the population.
    """
    if k < 1:
        raise SpecError(f"kreg-id needs k >= 1, got {k}")
    if bound < 2:
        raise SpecError(f"kreg-id needs bound >= 2, got {bound}")
    codec = kri_codec(k, bound)
    top = _level_top(bound)

    def rule(p: int, q: int) -> tuple[int, int]:
        a, b = _kri_rule(k, top, codec.decode(p), codec.decode(q))
        return codec.encode(*a), codec.encode(*b)

    return Protocol.from_rules(
        name="kreg-id",
        params={"k": k, "bound": bound, "exact": bound_is_exact_n},
        state_count=codec.size,
        initial=codec.encode("L0", 0, NO, NO),
        rule=rule,
        output=lambda s: codec.decode(s)[3],
        label=codec.label,
    )


def _kri_fields(protocol: Protocol) -> StateCodec:
    return kri_codec(protocol.params["k"], protocol.params["bound"])


def kri_level_bound_ok(protocol: Protocol, config: Configuration) -> bool:
    """Every agent's level is at most floor(log2 n)."""
    codec = _kri_fields(protocol)
    limit = _level_top(len(config))
    return all(codec.decode(s)[1] <= limit for s in config)


def kri_max_level_has_leader(protocol: Protocol, config: Configuration) -> bool:
    """Some agent at the highest level present holds a leader token."""
    states = [_kri_fields(protocol).decode(s) for s in config]
    top = max(s[1] for s in states)
    return any(s[1] == top and s[0].startswith("L") for s in states)


# === STAR IDENTIFICATION ===

NEVER = "never"
CANDIDATE = "l'"


@lru_cache(maxsize=None)
def si_codec(n: int) -> StateCodec:
    tokens = (PHI, PHI2, CANDIDATE) + tuple(f"L{i}" for i in range(2, n))
    return StateCodec([("lf", tokens), ("star", (YES, NO, NEVER))])


def _si_rule(n: int, a: tuple[str, str], b: tuple[str, str]) -> tuple[tuple[str, str], tuple[str, str]]:
    lf_a, star_a = a
    lf_b, star_b = b
    if star_a == NEVER or star_b == NEVER:
        return (lf_a, NEVER), (lf_b, NEVER)

    def count(lf: str) -> int:
        return int(lf[1:]) if lf.startswith("L") else 0

    # central agent election and counting, either orientation
    if lf_a == PHI and lf_b == PHI:
        lf_a = lf_b = CANDIDATE
    elif lf_a == CANDIDATE and lf_b == PHI:
        lf_a, lf_b = "L2", PHI2
    elif lf_b == CANDIDATE and lf_a == PHI:
        lf_a, lf_b = PHI2, "L2"
    elif 2 <= count(lf_a) <= n - 2 and lf_b == PHI:
        lf_a, lf_b = f"L{count(lf_a) + 1}", PHI2
    elif 2 <= count(lf_b) <= n - 2 and lf_a == PHI:
        lf_a, lf_b = PHI2, f"L{count(lf_b) + 1}"

    if count(lf_a) == n - 1 or count(lf_b) == n - 1:
        star_a = star_b = YES

    if {lf_a, lf_b} <= {PHI2, CANDIDATE} and PHI2 in (lf_a, lf_b):
        star_a = star_b = NEVER
    elif star_a == YES or star_b == YES:
        star_a = star_b = YES
    return (lf_a, star_a), (lf_b, star_b)


def star_id(n: int) -> Protocol:
    """Star identification for a population of n; 3n+3 states, symmetric delta.

    For n <= 2 every graph is a star, so a one-state all-yes protocol is returned.
    """
    if n < 1:
        raise SpecError(f"star-id needs n >= 1, got {n}")
    if n <= 2:
        return Protocol(name="star-id", params={"n": n}, state_count=1, initial=0, table=((0, 0),),
                        outputs=(YES,), weak_fair_compatible=True, labels=("(star,yes)",))
    codec = si_codec(n)

    def rule(p: int, q: int) -> tuple[int, int]:
        a, b = _si_rule(n, codec.decode(p), codec.decode(q))
        return codec.encode(*a), codec.encode(*b)

    return Protocol.from_rules(
        name="star-id",
        params={"n": n},
        state_count=codec.size,
        initial=codec.encode(PHI, NO),
        rule=rule,
        output=lambda s: YES if codec.decode(s)[1] == YES else NO,
        weak_fair_compatible=True,
        label=codec.label,
    )


def _si_states(protocol: Protocol, config: Configuration) -> list[tuple[str, str]]:
    codec = si_codec(protocol.params["n"])
    return [codec.decode(s) for s in config]


def si_conservation(protocol: Protocol, config: Configuration) -> tuple[int, int]:
    """(sum of counters held by central agents, marked agents + central agents)."""
    if protocol.state_count == 1:
        return (0, 0)
    states = _si_states(protocol, config)
    lhs = sum(int(lf[1:]) for lf, _ in states if lf.startswith("L"))
    rhs = sum(1 for lf, _ in states if lf == PHI2 or lf.startswith("L"))
    return lhs, rhs


def si_star_consistent(protocol: Protocol, config: Configuration) -> bool:
    """Once some agent holds L_{n-1}: exactly one candidate and n-2 marked agents remain."""
    if protocol.state_count == 1:
        return True
    n = protocol.params["n"]
    lfs = [lf for lf, _ in _si_states(protocol, config)]
    if f"L{n - 1}" not in lfs:
        return True
    return (lfs.count(f"L{n - 1}") == 1 and lfs.count(CANDIDATE) == 1
            and lfs.count(PHI2) == n - 2)


# === SPECS, ORACLES, PROBES ===

def parse_protocol_spec(text: str, n: int | None = None) -> Protocol:
    """Build a protocol from ``tree-id``, ``kreg-id:k=K[,bound=B][,exact]`` or ``star-id[:n=N]``.

    A missing bound (kreg-id) or population size (star-id) is taken from `n`.
    """
    name, _, rest = text.strip().partition(":")
    options: dict[str, str | bool] = {}
    for item in filter(None, (part.strip() for part in rest.split(","))):
        key, eq, value = item.partition("=")
        options[key.strip()] = value.strip() if eq else True

    def int_option(key: str) -> int | None:
        if key not in options:
            return None
        try:
            return int(options[key])
        except (TypeError, ValueError):
            raise SpecError(f"{name}: option {key} must be an integer, got {options[key]!r}") from None

    if name == "tree-id":
        if options:
            raise SpecError(f"tree-id takes no options, got {rest!r}")
        return tree_id()
    if name == "kreg-id":
        unknown = set(options) - {"k", "bound", "exact"}
        if unknown:
            raise SpecError(f"kreg-id: unknown option(s) {', '.join(sorted(unknown))}")
        k = int_option("k")
        if k is None:
            raise SpecError("kreg-id needs k=K")
        bound = int_option("bound") or n
        if bound is None:
            raise SpecError("kreg-id needs bound=B when the population size is unknown")
        exact = options.get("exact") is True or "bound" not in options
        return kreg_id(k, bound, bound_is_exact_n=exact)
    if name == "star-id":
        unknown = set(options) - {"n"}
        if unknown:
            raise SpecError(f"star-id: unknown option(s) {', '.join(sorted(unknown))}")
        size = int_option("n") or n
        if size is None:
            raise SpecError("star-id needs n=N when the population size is unknown")
        if n is not None and size != n:
            logger.warning("star-id built for n=%d but the graph has %d agents", size, n)
        return star_id(size)
    raise SpecError(f"unknown protocol {name!r} (expected tree-id, kreg-id or star-id)")


def class_oracle(protocol: Protocol) -> Callable[[Graph], bool] | None:
    """The graph predicate a protocol is meant to decide."""
    if protocol.name == "tree-id":
        return is_tree
    if protocol.name == "kreg-id":
        k = protocol.params["k"]
        return lambda g: is_kregular(g, k)
    if protocol.name == "star-id":
        return is_star
    return None


@dataclass
class ProbeMonitor:
    """Run monitor that evaluates a configuration predicate after every step and records failures."""
    name: str
    check: Callable[[Configuration], bool]
    checked: int = 0
    violations: list[int] = field(default_factory=list)

    def __call__(self, step_index: int, config: Configuration) -> None:
        self.checked += 1
        if not self.check(config):
            self.violations.append(step_index)

    @property
    def ok(self) -> bool:
        return not self.violations


def probes_for(protocol: Protocol) -> list[ProbeMonitor]:
    """The invariant probes that apply to a protocol."""
    if protocol.name == "kreg-id":
        return [
            ProbeMonitor("level bound", lambda c: kri_level_bound_ok(protocol, c)),
            ProbeMonitor("max-level leader", lambda c: kri_max_level_has_leader(protocol, c)),
        ]
    if protocol.name == "star-id" and protocol.state_count > 1:
        return [
            ProbeMonitor("conservation", lambda c: (lambda lr: lr[0] == lr[1])(si_conservation(protocol, c))),
            ProbeMonitor("central agent shape", lambda c: si_star_consistent(protocol, c)),
        ]
    return []
