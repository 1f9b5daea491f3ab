"""Pauli strings, the identity-insertion map and wire permutations.

Wire convention: wire 0 is the most significant bit of a basis-state index,
so the factor for wire 0 is the leftmost operand of every Kronecker product.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

I2 = np.eye(2, dtype=np.complex128)
X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
SINGLE_QUBIT_PAULIS = (I2, X, Y, Z)
PAULI_LABELS = "IXYZ"

MAX_BASIS_QUBITS = 4

for _p in SINGLE_QUBIT_PAULIS:
    _p.setflags(write=False)

Location = tuple[int, ...]


def make_location(qubits: Iterable[int], n: int | None = None) -> Location:
    """Canonical (ascending) location; validates distinctness and range."""
    q = tuple(int(i) for i in qubits)
    if not q:
        raise ValueError("location must contain at least one qubit")
    if len(set(q)) != len(q):
        raise ValueError(f"location has repeated qubits: {q}")
    if min(q) < 0 or (n is not None and max(q) >= n):
        raise ValueError(f"location {q} out of range for width {n}")
    return tuple(sorted(q))


@dataclass(frozen=True)
class PauliBasis:
    m: int
    strings: np.ndarray  # (4**m, 2**m, 2**m), read-only
    labels: tuple[str, ...]

    def __len__(self) -> int:
        return len(self.labels)


@lru_cache(maxsize=None)
def pauli_basis(m: int) -> PauliBasis:
    """All ``4**m`` Pauli strings in lexicographic I<X<Y<Z order.

    Index 0 is the identity; the first letter of a label acts on wire 0.
    """
    if not 1 <= m <= MAX_BASIS_QUBITS:
        raise ValueError(f"pauli_basis supports 1 <= m <= {MAX_BASIS_QUBITS}, got {m}")
    labels = []
    mats = []
    for combo in itertools.product(range(4), repeat=m):
        labels.append("".join(PAULI_LABELS[c] for c in combo))
        M = np.eye(1, dtype=np.complex128)
        for c in combo:
            M = np.kron(M, SINGLE_QUBIT_PAULIS[c])
        mats.append(M)
    strings = np.array(mats)
    strings.setflags(write=False)
    return PauliBasis(m, strings, tuple(labels))


def pauli_string(label: str) -> np.ndarray:
    M = np.eye(1, dtype=np.complex128)
    for ch in label.upper():
        M = np.kron(M, SINGLE_QUBIT_PAULIS[PAULI_LABELS.index(ch)])
    return M


def _bits(n: int) -> np.ndarray:
    idx = np.arange(2**n)
    return (idx[:, None] >> (n - 1 - np.arange(n))[None, :]) & 1


def map_pauli(Q: Sequence[int], n: int, s) -> np.ndarray:
    """Embed an operator on ``len(Q)`` qubits into ``n`` qubits.

    Factor ``j`` of ``s`` lands on wire ``Q[j]``; identity is inserted on all
    other wires.  Works for any operator, Pauli strings included.
    """
    Q = tuple(int(q) for q in Q)
    m = len(Q)
    if len(set(Q)) != m or min(Q) < 0 or max(Q) >= n:
        raise ValueError(f"invalid location {Q} for width {n}")
    s = np.asarray(s, dtype=np.complex128)
    if s.shape != (2**m, 2**m):
        raise ValueError(f"operator shape {s.shape} does not match {m} qubits")
    bits = _bits(n)
    weights = 1 << (m - 1 - np.arange(m))
    sub = bits[:, list(Q)] @ weights
    rest_wires = [w for w in range(n) if w not in Q]
    if rest_wires:
        rest = bits[:, rest_wires] @ (1 << (len(rest_wires) - 1 - np.arange(len(rest_wires))))
    else:
        rest = np.zeros(2**n, dtype=int)
    same_rest = rest[:, None] == rest[None, :]
    return np.where(same_rest, s[sub[:, None], sub[None, :]], 0.0)


@lru_cache(maxsize=None)
def _permutation_indices(Q: Location, n: int) -> np.ndarray:
    rest = [w for w in range(n) if w not in Q]
    # inner wire j -> outer wire order[j]
    order = list(Q) + rest
    bits = _bits(n)
    outer = np.zeros(2**n, dtype=int)
    for j, w in enumerate(order):
        outer |= bits[:, j] << (n - 1 - w)
    outer.setflags(write=False)
    return outer


def qubit_permutation_indices(Q: Sequence[int], n: int) -> np.ndarray:
    """``perm[inner] = outer`` basis-index map realized by ``P_Q``."""
    Q = tuple(int(q) for q in Q)
    if len(Q) > n or len(set(Q)) != len(Q) or (Q and (min(Q) < 0 or max(Q) >= n)):
        raise ValueError(f"invalid location {Q} for width {n}")
    return _permutation_indices(Q, n)


def qubit_permutation(Q: Sequence[int], n: int) -> np.ndarray:
    """Permutation matrix moving wires ``0..m-1`` onto ``Q``.

    ``P @ kron(G, I) @ P.T`` applies ``G`` to wires ``Q``; the remaining wires
    keep their relative order.
    """
    perm = qubit_permutation_indices(Q, n)
    P = np.zeros((2**n, 2**n))
    P[perm, np.arange(2**n)] = 1.0
    return P
