"""Coupling graphs and the block locations they allow."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from pathlib import Path

import networkx as nx

from .paulis import Location


@dataclass(frozen=True)
class Topology:
    n: int
    edges: frozenset[tuple[int, int]]
    name: str = "custom"

    def __post_init__(self):
        if self.n <= 0:
            raise ValueError("topology needs at least one qubit")
        norm = set()
        for a, b in self.edges:
            a, b = int(a), int(b)
            if a == b:
                raise ValueError(f"self-loop on qubit {a}")
            if not (0 <= a < self.n and 0 <= b < self.n):
                raise ValueError(f"edge ({a}, {b}) out of range for {self.n} qubits")
            norm.add((min(a, b), max(a, b)))
        object.__setattr__(self, "edges", frozenset(norm))

    @classmethod
    def all_to_all(cls, n: int) -> "Topology":
        return cls(n, frozenset(itertools.combinations(range(n), 2)), "all")

    @classmethod
    def linear(cls, n: int) -> "Topology":
        return cls(n, frozenset((i, i + 1) for i in range(n - 1)), "linear")

    @classmethod
    def from_file(cls, path, n: int) -> "Topology":
        """Read one ``i j`` edge per line; blank lines and ``#`` comments are skipped."""
        edges = []
        for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected 'i j', got {raw!r}")
            edges.append((int(parts[0]), int(parts[1])))
        return cls(n, frozenset(edges), f"coupling:{Path(path).name}")

    def graph(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(range(self.n))
        g.add_edges_from(self.edges)
        return g

    def adjacent(self, a: int, b: int) -> bool:
        return (min(a, b), max(a, b)) in self.edges

    def induced(self, qubits: Location) -> "Topology":
        """Subgraph on ``qubits``, relabeled to ``0..len(qubits)-1``."""
        index = {q: i for i, q in enumerate(qubits)}
        edges = frozenset(
            (index[a], index[b]) for a, b in self.edges if a in index and b in index
        )
        return Topology(len(qubits), edges, f"{self.name}[{','.join(map(str, qubits))}]")


def locations(t: Topology, m: int) -> list[Location]:
    """Every m-qubit subset whose induced subgraph is connected, sorted."""
    if not 1 <= m <= t.n:
        raise ValueError(f"block size {m} invalid for {t.n} qubits")
    g = t.graph()
    return [
        combo
        for combo in itertools.combinations(range(t.n), m)
        if nx.is_connected(g.subgraph(combo))
    ]
