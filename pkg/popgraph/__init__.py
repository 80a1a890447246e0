"""popgraph - population protocols that identify the class of their communication graph."""

__version__ = "0.3.0"
