"""Analytic benchmark targets."""

from __future__ import annotations

from functools import reduce

import numpy as np

from .numkit import expm
from .paulis import I2, X, Z

# transverse-field Ising convention: H = J sum Z_i Z_{i+1} + h sum X_i
TFIM_J = 1.0
TFIM_H = 1.0
TFIM_DT = 0.1


def permutation_unitary(perm) -> np.ndarray:
    """Unitary sending basis state j to ``perm[j]``."""
    d = len(perm)
    U = np.zeros((d, d), dtype=np.complex128)
    U[list(perm), np.arange(d)] = 1.0
    return U


def toffoli() -> np.ndarray:
    perm = list(range(8))
    perm[6], perm[7] = 7, 6
    return permutation_unitary(perm)


def fredkin() -> np.ndarray:
    # control on wire 0 swaps wires 1 and 2: |101> <-> |110>
    perm = list(range(8))
    perm[5], perm[6] = 6, 5
    return permutation_unitary(perm)


def qft(n: int) -> np.ndarray:
    d = 2**n
    j = np.arange(d)
    return np.exp(2j * np.pi * np.outer(j, j) / d) / np.sqrt(d)


def _op(n: int, where: dict[int, np.ndarray]) -> np.ndarray:
    return reduce(np.kron, [where.get(i, I2) for i in range(n)])


def tfim_hamiltonian(n: int, J: float = TFIM_J, h: float = TFIM_H) -> np.ndarray:
    H = sum(J * _op(n, {i: Z, i + 1: Z}) for i in range(n - 1))
    return H + sum(h * _op(n, {i: X}) for i in range(n))


def tfim(n: int, steps: int, dt: float = TFIM_DT) -> np.ndarray:
    step = expm(-1j * dt * tfim_hamiltonian(n))
    return np.linalg.matrix_power(step, steps)


def trotter_cnots(n: int, steps: int) -> int:
    """CNOTs of the textbook first-order circuit: each ZZ term costs two."""
    return 2 * (n - 1) * steps


def suite(name: str) -> list[tuple[str, np.ndarray]]:
    if name == "small":
        out = [("toffoli", toffoli()), ("fredkin", fredkin()), ("qft3", qft(3))]
        out += [(f"tfim-3-{k}", tfim(3, k)) for k in (1, 5, 10)]
        return out
    if name == "stretch":
        out = [("qft4", qft(4))]
        out += [(f"tfim-4-{k}", tfim(4, k)) for k in (1, 5, 10)]
        return out
    raise ValueError(f"unknown suite {name!r}; choose small or stretch")
