from __future__ import annotations

from dataclasses import dataclass

from .circuit import Circuit


@dataclass(frozen=True)
class Metrics:
    cnot_count: int
    u3_count: int
    depth: int
    parallelism: float

    @property
    def total_gates(self) -> int:
        return self.cnot_count + self.u3_count

    def row(self) -> str:
        return f"{self.cnot_count:>6d} {self.u3_count:>6d} {self.depth:>6d} {self.parallelism:>11.2f}"


METRICS_HEADER = f"{'CNOTs':>6s} {'U3s':>6s} {'Depth':>6s} {'Parallelism':>11s}"


def metrics(c: Circuit) -> Metrics:
    """Gate counts, critical path (gates sharing a wire are ordered) and
    average parallelism = total gates / critical path."""
    level = [0] * c.n
    for g in c.gates:
        lv = max(level[w] for w in g.wires) + 1
        for w in g.wires:
            level[w] = lv
    depth = max(level, default=0)
    total = len(c.gates)
    return Metrics(c.cnot_count, c.u3_count, depth, total / depth if depth else 0.0)
