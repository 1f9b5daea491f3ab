"""Native-gate circuit IR and dense simulation.

Gates are U3 on one wire and CNOT on an ordered (control, target) pair.
``gates[0]`` is applied first.  Wire 0 is the most significant bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

from ..errors import ResourceLimitError

MAX_SIM_QUBITS = 10
_DEGENERATE = 1e-12


def u3_matrix(theta: float, phi: float, lam: float) -> np.ndarray:
    c = math.cos(theta / 2)
    s = math.sin(theta / 2)
    return np.array(
        [
            [c, -np.exp(1j * lam) * s],
            [np.exp(1j * phi) * s, np.exp(1j * (lam + phi)) * c],
        ],
        dtype=np.complex128,
    )


def _wrap(a: float) -> float:
    """Wrap an angle into (-pi, pi]."""
    a = math.remainder(a, 2 * math.pi)
    if a <= -math.pi:
        a += 2 * math.pi
    return a


def canonical_angles(theta: float, phi: float, lam: float) -> tuple[float, float, float]:
    """theta in [0, pi], phi and lambda in (-pi, pi]; same matrix up to phase."""
    theta = math.remainder(theta, 2 * math.pi)  # 2pi shifts only flip the sign
    if theta < 0:
        theta, phi, lam = -theta, phi + math.pi, lam + math.pi
    return theta, _wrap(phi), _wrap(lam)


def zyz_angles(V) -> tuple[float, float, float]:
    """U3 angles whose matrix equals ``V`` up to global phase."""
    V = np.asarray(V, dtype=np.complex128)
    a00, a10 = abs(V[0, 0]), abs(V[1, 0])
    theta = 2 * math.atan2(a10, a00)
    if a10 <= _DEGENERATE:
        phi = np.angle(V[1, 1]) - np.angle(V[0, 0])
        lam = 0.0
    elif a00 <= _DEGENERATE:
        phi = np.angle(V[1, 0]) - np.angle(-V[0, 1])
        lam = 0.0
    else:
        g = np.angle(V[0, 0])
        phi = np.angle(V[1, 0]) - g
        lam = np.angle(-V[0, 1]) - g
    return canonical_angles(theta, float(phi), float(lam))


@dataclass(frozen=True)
class U3:
    theta: float
    phi: float
    lam: float
    wire: int

    @property
    def wires(self) -> tuple[int, ...]:
        return (self.wire,)

    def matrix(self) -> np.ndarray:
        return u3_matrix(self.theta, self.phi, self.lam)

    def canonical(self) -> "U3":
        return U3(*canonical_angles(self.theta, self.phi, self.lam), self.wire)

    def relabel(self, mapping: Sequence[int]) -> "U3":
        return U3(self.theta, self.phi, self.lam, mapping[self.wire])


@dataclass(frozen=True)
class CNOT:
    control: int
    target: int

    def __post_init__(self):
        if self.control == self.target:
            raise ValueError("CNOT control and target must differ")

    @property
    def wires(self) -> tuple[int, ...]:
        return (self.control, self.target)

    def relabel(self, mapping: Sequence[int]) -> "CNOT":
        return CNOT(mapping[self.control], mapping[self.target])


Gate = Union[U3, CNOT]


def u3_from_matrix(V, wire: int) -> U3:
    return U3(*zyz_angles(V), wire)


def merge_u3(g1: U3, g2: U3) -> U3:
    """Single U3 equal (up to phase) to applying ``g1`` then ``g2``."""
    if g1.wire != g2.wire:
        raise ValueError("can only merge U3 gates on the same wire")
    return u3_from_matrix(g2.matrix() @ g1.matrix(), g1.wire)


@dataclass(frozen=True)
class Circuit:
    n: int
    gates: tuple[Gate, ...] = ()

    def __post_init__(self):
        if self.n <= 0:
            raise ValueError("circuit width must be positive")
        gates = tuple(self.gates)
        for g in gates:
            if not isinstance(g, (U3, CNOT)):
                raise TypeError(f"unsupported gate {g!r}")
            if any(not 0 <= w < self.n for w in g.wires):
                raise ValueError(f"gate {g} touches a wire outside 0..{self.n - 1}")
        object.__setattr__(self, "gates", gates)

    def __len__(self) -> int:
        return len(self.gates)

    def __iter__(self):
        return iter(self.gates)

    @property
    def cnot_count(self) -> int:
        return sum(isinstance(g, CNOT) for g in self.gates)

    @property
    def u3_count(self) -> int:
        return sum(isinstance(g, U3) for g in self.gates)

    def relabel(self, mapping: Sequence[int], n: int) -> "Circuit":
        return Circuit(n, tuple(g.relabel(mapping) for g in self.gates))

    def canonical(self) -> "Circuit":
        return Circuit(self.n, tuple(g.canonical() if isinstance(g, U3) else g for g in self.gates))

    def extend(self, gates: Iterable[Gate]) -> "Circuit":
        return Circuit(self.n, self.gates + tuple(gates))


NativeCircuit = Circuit

_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)


def _apply(state: np.ndarray, gate: Gate, n: int) -> np.ndarray:
    # state has shape (2,)*n + (cols,)
    if isinstance(gate, U3):
        state = np.tensordot(gate.matrix(), state, axes=([1], [gate.wire]))
        return np.moveaxis(state, 0, gate.wire)
    out = state.copy()
    sel = [slice(None)] * (n + 1)
    sel[gate.control] = 1
    sub = out[tuple(sel)]
    t_axis = gate.target if gate.target < gate.control else gate.target - 1
    out[tuple(sel)] = np.flip(sub, axis=t_axis)
    return out


def circuit_to_unitary(c: Circuit) -> np.ndarray:
    """Dense unitary of ``c`` (gates applied in list order)."""
    n = c.n
    if n > MAX_SIM_QUBITS:
        raise ResourceLimitError(f"dense simulation is capped at {MAX_SIM_QUBITS} qubits, got {n}")
    d = 2**n
    state = np.eye(d, dtype=np.complex128).reshape((2,) * n + (d,))
    for g in c.gates:
        state = _apply(state, g, n)
    return state.reshape(d, d)


def apply_circuit(c: Circuit, psi) -> np.ndarray:
    """Apply ``c`` to state vector(s); ``psi`` has shape (2**n,) or (2**n, k)."""
    psi = np.asarray(psi, dtype=np.complex128)
    if c.n > MAX_SIM_QUBITS:
        raise ResourceLimitError(f"dense simulation is capped at {MAX_SIM_QUBITS} qubits, got {c.n}")
    vec = psi.ndim == 1
    cols = psi.reshape(2**c.n, -1)
    state = cols.reshape((2,) * c.n + (cols.shape[1],))
    for g in c.gates:
        state = _apply(state, g, c.n)
    out = state.reshape(2**c.n, -1)
    return out[:, 0] if vec else out
