"""Exception hierarchy shared by the library and the CLI."""


class PopgraphError(Exception):
    """Base class for every error raised by popgraph."""


class ConfigError(PopgraphError):
    """An environment setting could not be parsed."""


class GraphError(PopgraphError, ValueError):
    """Invalid graph parameters, malformed edge-list file, or a disconnected graph."""


class SpecError(PopgraphError, ValueError):
    """A protocol, graph or scheduler spec string could not be parsed."""


class InvalidInteraction(PopgraphError):
    """An interaction names a pair of agents that is not an edge of the graph."""

    def __init__(self, initiator: int, responder: int):
        super().__init__(f"({initiator}, {responder}) is not an edge of the graph")
        self.initiator = initiator
        self.responder = responder


class CapExceeded(PopgraphError):
    """Reachability exploration visited more configurations than allowed."""

    def __init__(self, cap: int, explored: int):
        super().__init__(f"reachable configuration count exceeded cap {cap:,} (explored {explored:,})")
        self.cap = cap
        self.explored = explored


class ScriptExhausted(PopgraphError):
    """A scripted scheduler was asked for an interaction past the end of its script."""

    def __init__(self, step_index: int):
        super().__init__(f"script exhausted at step {step_index}")
        self.step_index = step_index


class BudgetExceeded(PopgraphError):
    """A construction did not find what it was looking for within its step budget."""


class ConstructionError(PopgraphError):
    """A counterexample construction reached a state its argument rules out."""
