"""Native instantiation of block unitaries into U3 + CNOT circuits.

The default backend fits fixed templates with 0, 1, 2, 3 CNOTs::

    U3 (x) U3, then k times [CX(0->1), U3 (x) U3]

and returns the cheapest template that reaches the distance threshold.  Any
two-qubit unitary fits the 3-CNOT template.  Before fitting, templates whose
CNOT count is ruled out by the local-invariant criteria of Shende, Bullock and
Markov (2004) are skipped; the criteria are evaluated with a margin far larger
than the fit threshold, so skipping never removes a template that could fit.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Protocol, Sequence

import numpy as np

from .circuitkit.circuit import CNOT, U3, Circuit, NativeCircuit, canonical_angles, u3_matrix, zyz_angles
from .errors import SynthesisError
from .gatemodel import distance
from .numkit import maxnorm
from .optimizer import MinimizeOptions, minimize
from .paulis import Y

__all__ = [
    "u3_matrix",
    "BackendInterface",
    "TemplateBackend",
    "BACKENDS",
    "get_backend",
    "instantiate_2q",
    "instantiate_blocks",
    "cnot_lower_bound",
]

CX01 = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=np.complex128)
_YY = np.kron(Y, Y)


class BackendInterface(Protocol):
    arity: int

    def synthesize(self, U: np.ndarray, threshold: float, rng: np.random.Generator) -> NativeCircuit: ...


def _u3_and_derivs(angles: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Batched U3 matrices (k, 2, 2) and their angle derivatives (k, 3, 2, 2)."""
    th, ph, la = angles[:, 0], angles[:, 1], angles[:, 2]
    c, s = np.cos(th / 2), np.sin(th / 2)
    el, ep, elp = np.exp(1j * la), np.exp(1j * ph), np.exp(1j * (la + ph))
    k = len(angles)
    U = np.empty((k, 2, 2), dtype=np.complex128)
    U[:, 0, 0] = c
    U[:, 0, 1] = -el * s
    U[:, 1, 0] = ep * s
    U[:, 1, 1] = elp * c
    D = np.zeros((k, 3, 2, 2), dtype=np.complex128)
    D[:, 0, 0, 0] = -s / 2
    D[:, 0, 0, 1] = -el * c / 2
    D[:, 0, 1, 0] = ep * c / 2
    D[:, 0, 1, 1] = -elp * s / 2
    D[:, 1, 1, 0] = 1j * ep * s
    D[:, 1, 1, 1] = 1j * elp * c
    D[:, 2, 0, 1] = -1j * el * s
    D[:, 2, 1, 1] = 1j * elp * c
    return U, D


def template_unitary(params: np.ndarray, k: int) -> np.ndarray:
    ang = np.asarray(params, dtype=float).reshape(2 * (k + 1), 3)
    U, _ = _u3_and_derivs(ang)
    C = np.kron(U[0], U[1])
    for i in range(1, k + 1):
        C = np.kron(U[2 * i], U[2 * i + 1]) @ CX01 @ C
    return C


def _template_objective(params: np.ndarray, k: int, target: np.ndarray):
    ang = params.reshape(2 * (k + 1), 3)
    U, D = _u3_and_derivs(ang)
    locals_ = [np.kron(U[2 * i], U[2 * i + 1]) for i in range(k + 1)]
    # sequence: L0, CX, L1, CX, ..., Lk
    seq = [locals_[0]]
    for i in range(1, k + 1):
        seq += [CX01, locals_[i]]
    eye = np.eye(4, dtype=np.complex128)
    before = [eye]
    for M in seq[:-1]:
        before.append(M @ before[-1])
    after = [eye] * len(seq)
    for j in range(len(seq) - 2, -1, -1):
        after[j] = after[j + 1] @ seq[j + 1]
    Th = target.conj().T
    t = np.trace(Th @ after[0] @ seq[0])
    abs_t = abs(t)
    f = 1.0 - abs_t / 4.0
    grad = np.zeros_like(params)
    if abs_t == 0.0:
        return f, grad
    coef = -np.conj(t) / (abs_t * 4.0)
    g = grad.reshape(2 * (k + 1), 3)
    for i in range(k + 1):
        j = 2 * i
        X4 = (before[j] @ Th @ after[j]).reshape(2, 2, 2, 2)
        a, b = 2 * i, 2 * i + 1
        # Tr(X (A (x) B)) = sum X[a c, b e] A[b, a] B[e, c]
        XB = np.einsum("acbe,ec->ab", X4, U[b])
        XA = np.einsum("acbe,ba->ce", X4, U[a])
        g[a] = np.real(coef * np.einsum("ab,kba->k", XB, D[a]))
        g[b] = np.real(coef * np.einsum("ce,kec->k", XA, D[b]))
    return f, grad


def _params_to_circuit(params: np.ndarray, k: int) -> Circuit:
    ang = np.asarray(params, dtype=float).reshape(2 * (k + 1), 3)
    gates: list = [U3(*canonical_angles(*ang[0]), 0), U3(*canonical_angles(*ang[1]), 1)]
    for i in range(1, k + 1):
        gates.append(CNOT(0, 1))
        gates.append(U3(*canonical_angles(*ang[2 * i]), 0))
        gates.append(U3(*canonical_angles(*ang[2 * i + 1]), 1))
    return Circuit(2, tuple(gates))


def _gamma(U: np.ndarray) -> np.ndarray:
    det = np.linalg.det(U)
    V = U / det ** 0.25
    return V @ _YY @ V.T @ _YY


def invariant_residuals(U) -> tuple[float, float, float]:
    """Distances from the 0-, 1- and 2-CNOT conditions (0 means satisfied)."""
    g = _gamma(np.asarray(U, dtype=np.complex128))
    eye = np.eye(4)
    tr = np.trace(g)
    r0 = min(maxnorm(g - eye), maxnorm(g + eye))
    r1 = max(abs(tr) / 4.0, maxnorm(g @ g + eye))
    r2 = abs(tr.imag) / 4.0
    return r0, r1, r2


def cnot_lower_bound(U, margin: float) -> int:
    """Smallest k in 0..3 whose invariant condition holds within ``margin``."""
    for k, r in enumerate(invariant_residuals(U)):
        if r <= margin:
            return k
    return 3


def _prune_margin(threshold: float) -> float:
    return max(1e-6, 100.0 * math.sqrt(threshold))


@dataclass
class TemplateBackend:
    """Template search over 0..3 CNOTs for two-qubit blocks (also handles
    single-qubit blocks by Euler-angle extraction)."""

    restarts: int = 8
    escalated_restarts: int = 32
    prune: bool = True
    options: MinimizeOptions = field(
        default_factory=lambda: MinimizeOptions(max_iterations=1000, gradient_tolerance=1e-12)
    )
    arity: int = 2

    def fit(self, U: np.ndarray, k: int, threshold: float, rng: np.random.Generator, restarts: int):
        """Best ``(distance, params)`` over ``restarts`` random starts."""
        opts = MinimizeOptions(
            max_iterations=self.options.max_iterations,
            gradient_tolerance=self.options.gradient_tolerance,
            memory=self.options.memory,
            max_line_search=self.options.max_line_search,
            f_target=threshold * 1e-3,
        )
        best = (math.inf, None)
        for _ in range(restarts):
            x0 = rng.uniform(-math.pi, math.pi, size=6 * (k + 1))
            res = minimize(lambda p: _template_objective(p, k, U), x0, opts)
            f = distance(template_unitary(res.x, k), U)
            if f < best[0]:
                best = (f, res.x)
            if f <= threshold:
                break
        return best

    def synthesize(self, U, threshold: float = 1e-8, rng: np.random.Generator | None = None) -> Circuit:
        U = np.asarray(U, dtype=np.complex128)
        rng = rng if rng is not None else np.random.default_rng(0)
        if U.shape == (2, 2):
            c = Circuit(1, (U3(*zyz_angles(U), 0),))
            return c
        if U.shape != (4, 4):
            raise ValueError(f"template backend handles 1- and 2-qubit blocks, got shape {U.shape}")
        start = cnot_lower_bound(U, _prune_margin(threshold)) if self.prune else 0
        best_any = (math.inf, None, None)
        for k in range(start, 4):
            f, x = self.fit(U, k, threshold, rng, self.restarts)
            if f <= threshold:
                return _params_to_circuit(x, k)
            if f < best_any[0]:
                best_any = (f, x, k)
        f, x = self.fit(U, 3, threshold, rng, self.escalated_restarts)
        if f <= threshold:
            return _params_to_circuit(x, 3)
        raise SynthesisError(
            f"no template reached distance {threshold:g} (best {min(f, best_any[0]):.3g}); input may not be unitary"
        )


BACKENDS: dict[str, Callable[[], BackendInterface]] = {"template2q": TemplateBackend}


def get_backend(name: str) -> BackendInterface:
    try:
        return BACKENDS[name]()
    except KeyError:
        raise ValueError(f"unknown backend {name!r}; choose from {sorted(BACKENDS)}") from None


def instantiate_2q(U, threshold: float = 1e-8, seed: int = 0) -> Circuit:
    U = np.asarray(U)
    if U.shape != (4, 4):
        raise ValueError(f"expected a 4x4 unitary, got {U.shape}")
    return TemplateBackend().synthesize(U, threshold, np.random.default_rng(seed))


def _block_task(args):
    backend, U, threshold, seed, index = args
    try:
        return backend.synthesize(U, threshold, np.random.default_rng([seed, index]))
    except Exception as exc:
        raise SynthesisError(f"block {index}: {exc}") from exc


def instantiate_blocks(
    bl,
    backend: BackendInterface | None = None,
    threshold: float = 1e-8,
    seed: int = 0,
    jobs: int = 1,
) -> list[Circuit]:
    """One native circuit per block, in block order.

    Each block gets its own RNG stream derived from ``(seed, block index)``, so
    results do not depend on ``jobs``.
    """
    backend = backend or TemplateBackend()
    tasks = [(backend, np.asarray(M), threshold, seed, i) for i, (_, M) in enumerate(bl.blocks)]
    for _, M, _, _, i in tasks:
        if M.shape[0] > 2**backend.arity:
            raise ValueError(f"block {i} has dimension {M.shape[0]}, backend handles {2**backend.arity}")
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_block_task, tasks))
    return [_block_task(t) for t in tasks]


def circuit_cnots(circuits: Sequence[Circuit]) -> int:
    return sum(c.cnot_count for c in circuits)
