"""Runtime settings from the environment (and an optional .env file), plus logging setup."""

import logging
import os
from dataclasses import dataclass

from dotenv import load_dotenv
from rich.logging import RichHandler

from .errors import ConfigError

# Load .env file if it exists
load_dotenv()

DEFAULT_MAX_STEPS = 1_000_000
DEFAULT_WINDOW_FACTOR = 50
DEFAULT_CAP = 10_000_000
DEFAULT_PERIOD_BUDGET = 100_000
DEFAULT_CONFIRM_CAP = 20_000
DEFAULT_CONFIRM_AGENTS = 10
DEFAULT_EXTENDED_FACTOR = 10


def _int_env(name: str, default: int, minimum: int = 1) -> int:
    raw = os.getenv(name, "").strip()
    if not raw:
        return default
    try:
        value = int(raw.replace("_", ""))
    except ValueError as e:
        raise ConfigError(f"{name} must be an integer, got {raw!r}") from e
    if value < minimum:
        raise ConfigError(f"{name} must be >= {minimum}, got {value}")
    return value


@dataclass(frozen=True)
class Settings:
    """Budgets and defaults shared by the CLI commands."""
    max_steps: int = DEFAULT_MAX_STEPS
    window_factor: int = DEFAULT_WINDOW_FACTOR
    cap: int = DEFAULT_CAP
    sweep_workers: int = 1
    period_budget: int = DEFAULT_PERIOD_BUDGET
    confirm_cap: int = DEFAULT_CONFIRM_CAP
    confirm_agents: int = DEFAULT_CONFIRM_AGENTS
    extended_factor: int = DEFAULT_EXTENDED_FACTOR
    log_level: str = "WARNING"

    @classmethod
    def from_env(cls) -> "Settings":
        """Read POPGRAPH_* variables, falling back to the built-in defaults."""
        level = os.getenv("POPGRAPH_LOG_LEVEL", "WARNING").strip().upper() or "WARNING"
        if level not in logging.getLevelNamesMapping():
            raise ConfigError(f"POPGRAPH_LOG_LEVEL must be a logging level name, got {level!r}")
        return cls(
            max_steps=_int_env("POPGRAPH_MAX_STEPS", DEFAULT_MAX_STEPS),
            window_factor=_int_env("POPGRAPH_WINDOW_FACTOR", DEFAULT_WINDOW_FACTOR),
            cap=_int_env("POPGRAPH_CAP", DEFAULT_CAP),
            sweep_workers=_int_env("POPGRAPH_SWEEP_WORKERS", 1),
            period_budget=_int_env("POPGRAPH_PIVOT_BUDGET", DEFAULT_PERIOD_BUDGET),
            confirm_cap=_int_env("POPGRAPH_CONFIRM_CAP", DEFAULT_CONFIRM_CAP),
            confirm_agents=_int_env("POPGRAPH_CONFIRM_AGENTS", DEFAULT_CONFIRM_AGENTS, minimum=0),
            extended_factor=_int_env("POPGRAPH_EXTENDED_FACTOR", DEFAULT_EXTENDED_FACTOR),
            log_level=level,
        )

    def window_for(self, agents: int, edge_count: int) -> int:
        """Default output-quiescence window: factor x n x |E| (at least one step)."""
        return max(1, self.window_factor * agents * edge_count)

    def confirm_cap_for(self, agents: int) -> int | None:
        """Reachable-set cap for confirming a quiet run, or None when n is too large to try."""
        return self.confirm_cap if agents <= self.confirm_agents else None


def setup_logging(level: str | int = "WARNING") -> None:
    """Route the popgraph loggers through a rich handler (installed once)."""
    root = logging.getLogger("popgraph")
    root.setLevel(level)
    if not any(isinstance(h, RichHandler) for h in root.handlers):
        handler = RichHandler(show_path=False, rich_tracebacks=True)
        handler.setFormatter(logging.Formatter("%(message)s"))
        root.addHandler(handler)
