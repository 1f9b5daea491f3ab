"""Topology-aware unitary synthesis with generic-block decomposition."""

__version__ = "0.1.0"
