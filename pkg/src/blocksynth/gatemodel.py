"""Generic-gate parameterizations, distances and analytic gradients.

A generic m-qubit gate is ``G(alpha) = expm(i * sum_k alpha[k] * sigma_k)``
over the ``4**m`` Pauli strings.  It is placed in an n-qubit circuit either at
a fixed location, ``P_Q (G (x) I) P_Q^T``, or multiplexed over candidate
locations with softmax weights, ``S (G (x) I) S^T`` with
``S = sum_Q softmax(l)_Q P_Q``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .numkit import expm, expm_frechet
from .paulis import Location, make_location, pauli_basis, qubit_permutation, qubit_permutation_indices


@dataclass(frozen=True)
class GateFunction:
    m: int
    alpha: np.ndarray

    def __post_init__(self):
        alpha = np.asarray(self.alpha, dtype=float).reshape(-1)
        if alpha.shape != (4**self.m,):
            raise ValueError(f"alpha must have length 4**{self.m} = {4**self.m}, got {alpha.size}")
        if not np.all(np.isfinite(alpha)):
            raise ValueError("alpha has non-finite entries")
        object.__setattr__(self, "alpha", alpha)


@dataclass(frozen=True)
class FixedBlock:
    fn: GateFunction
    location: Location
    n: int

    def __post_init__(self):
        loc = make_location(self.location, self.n)
        if len(loc) != self.fn.m:
            raise ValueError(f"location {loc} has {len(loc)} qubits, gate has {self.fn.m}")
        object.__setattr__(self, "location", loc)


@dataclass(frozen=True)
class VariableBlock:
    fn: GateFunction
    candidates: tuple[Location, ...]
    l: np.ndarray
    n: int

    def __post_init__(self):
        cands = tuple(make_location(c, self.n) for c in self.candidates)
        if not cands:
            raise ValueError("a variable block needs at least one candidate location")
        if any(len(c) != self.fn.m for c in cands):
            raise ValueError("all candidate locations must match the gate size")
        logits = np.asarray(self.l, dtype=float).reshape(-1)
        if logits.shape != (len(cands),):
            raise ValueError(f"need {len(cands)} location logits, got {logits.size}")
        object.__setattr__(self, "candidates", cands)
        object.__setattr__(self, "l", logits)


Block = Union[FixedBlock, VariableBlock]


def softmax(l) -> np.ndarray:
    l = np.asarray(l, dtype=float)
    e = np.exp(l - np.max(l))
    return e / e.sum()


def _hermitian(alpha: np.ndarray, m: int) -> np.ndarray:
    return np.tensordot(alpha, pauli_basis(m).strings, axes=1)


def gate_unitary(fn: GateFunction) -> np.ndarray:
    return expm(1j * _hermitian(fn.alpha, fn.m))


def _pad(G: np.ndarray, n: int) -> np.ndarray:
    rest = 2**n // G.shape[-1]
    return np.kron(G, np.eye(rest)) if rest > 1 else G


def fixed_unitary(b: FixedBlock) -> np.ndarray:
    P = qubit_permutation(b.location, b.n)
    return P @ _pad(gate_unitary(b.fn), b.n) @ P.T


def location_mixture(candidates: Sequence[Location], l, n: int) -> np.ndarray:
    """``sum_Q softmax(l)_Q P_Q``."""
    s = softmax(l)
    return sum(w * qubit_permutation(Q, n) for w, Q in zip(s, candidates))


def variable_unitary(b: VariableBlock) -> np.ndarray:
    """Multiplexed-location operator; unitary only when softmax(l) is one-hot."""
    S = location_mixture(b.candidates, b.l, b.n)
    return S @ _pad(gate_unitary(b.fn), b.n) @ S.T


def block_unitary(b: Block) -> np.ndarray:
    if isinstance(b, FixedBlock):
        return fixed_unitary(b)
    return variable_unitary(b)


def circuit_product(mats: Sequence[np.ndarray], n: int) -> np.ndarray:
    """Product of block unitaries; ``mats[0]`` acts first."""
    d = 2**n
    U = np.eye(d, dtype=np.complex128)
    for M in mats:
        M = np.asarray(M)
        if M.shape != (d, d):
            raise ValueError(f"block of shape {M.shape} in a {n}-qubit circuit")
        U = M @ U
    return U


def _check_pair(U_C, U_T) -> tuple[np.ndarray, np.ndarray]:
    U_C = np.asarray(U_C)
    U_T = np.asarray(U_T)
    if U_C.ndim != 2 or U_C.shape != U_T.shape or U_C.shape[0] != U_C.shape[1]:
        raise ValueError(f"dimension mismatch: {U_C.shape} vs {U_T.shape}")
    return U_C, U_T


def distance(U_C, U_T) -> float:
    """Phase-insensitive Hilbert-Schmidt distance ``1 - |Tr(U_T^H U_C)| / d``."""
    U_C, U_T = _check_pair(U_C, U_T)
    d = U_C.shape[0]
    t = np.vdot(U_T, U_C)  # Tr(U_T^H U_C)
    return float(min(1.0, max(0.0, 1.0 - abs(t) / d)))


def distance_frobenius(U_C, U_T) -> float:
    """``1 - Re Tr(U_T^H U_C) / d``; sensitive to global phase, range [0, 2]."""
    U_C, U_T = _check_pair(U_C, U_T)
    d = U_C.shape[0]
    return float(1.0 - np.vdot(U_T, U_C).real / d)


@dataclass(frozen=True)
class _Slot:
    m: int
    locations: tuple[Location, ...]
    variable: bool
    alpha_slice: slice
    l_slice: slice | None


@dataclass
class CircuitModel:
    """Fixed structure of blocks over a flat parameter vector.

    Parameter layout: every block's alpha in block order, then the location
    logits of every variable block in block order.
    """

    n: int
    slots: list[_Slot] = field(default_factory=list)

    @classmethod
    def from_structure(cls, n: int, structure: Sequence[tuple[int, Sequence[Location], bool]]):
        """``structure`` items are ``(m, locations, variable)``."""
        model = cls(n)
        offset = 0
        shapes = []
        for m, locs, variable in structure:
            locs = tuple(make_location(q, n) for q in locs)
            if not locs or any(len(q) != m for q in locs):
                raise ValueError(f"locations {locs} do not match block size {m}")
            if not variable and len(locs) != 1:
                raise ValueError("a fixed block has exactly one location")
            shapes.append((m, locs, variable, slice(offset, offset + 4**m)))
            offset += 4**m
        for m, locs, variable, a_sl in shapes:
            l_sl = None
            if variable:
                l_sl = slice(offset, offset + len(locs))
                offset += len(locs)
            model.slots.append(_Slot(m, locs, variable, a_sl, l_sl))
        model._size = offset
        model._prepare()
        return model

    @classmethod
    def from_blocks(cls, blocks: Sequence[Block]) -> tuple["CircuitModel", np.ndarray]:
        if not blocks:
            raise ValueError("need at least one block")
        n = blocks[0].n
        if any(b.n != n for b in blocks):
            raise ValueError("blocks disagree on circuit width")
        structure = []
        for b in blocks:
            if isinstance(b, FixedBlock):
                structure.append((b.fn.m, (b.location,), False))
            else:
                structure.append((b.fn.m, b.candidates, True))
        model = cls.from_structure(n, structure)
        x = np.zeros(model.num_params)
        for b, slot in zip(blocks, model.slots):
            x[slot.alpha_slice] = b.fn.alpha
            if slot.variable:
                x[slot.l_slice] = b.l
        return model, x

    def _prepare(self) -> None:
        d = 2**self.n
        self._perms = []
        for slot in self.slots:
            perms = [np.asarray(qubit_permutation_indices(Q, self.n)) for Q in slot.locations]
            self._perms.append(perms)
        self._dense = [
            [qubit_permutation(Q, self.n) for Q in slot.locations] if slot.variable else None
            for slot in self.slots
        ]
        self._eye = np.eye(d, dtype=np.complex128)

    @property
    def num_params(self) -> int:
        return self._size

    def blocks(self, x) -> list[Block]:
        x = np.asarray(x, dtype=float)
        out: list[Block] = []
        for slot in self.slots:
            fn = GateFunction(slot.m, x[slot.alpha_slice])
            if slot.variable:
                out.append(VariableBlock(fn, slot.locations, x[slot.l_slice], self.n))
            else:
                out.append(FixedBlock(fn, slot.locations[0], self.n))
        return out

    def _gates(self, x: np.ndarray) -> list[tuple[np.ndarray, np.ndarray]]:
        """``(i*H, G)`` per block, exponentials batched by block size."""
        out: list = [None] * len(self.slots)
        by_m: dict[int, list[int]] = {}
        for i, slot in enumerate(self.slots):
            by_m.setdefault(slot.m, []).append(i)
        for m, idx in by_m.items():
            sig = pauli_basis(m).strings
            alphas = np.stack([x[self.slots[i].alpha_slice] for i in idx])
            A = 1j * np.tensordot(alphas, sig, axes=1)
            G = expm(A)
            for j, i in enumerate(idx):
                out[i] = (A[j], G[j])
        return out

    def _embed(self, i: int, G: np.ndarray, x: np.ndarray):
        """Full-width block matrix plus what the gradient needs."""
        slot = self.slots[i]
        K = _pad(G, self.n)
        if not slot.variable:
            perm = self._perms[i][0]
            M = np.empty_like(K)
            M[np.ix_(perm, perm)] = K
            return M, K, None
        s = softmax(x[slot.l_slice])
        S = np.tensordot(s, np.asarray(self._dense[i]), axes=1)
        return S @ K @ S.T, K, (s, S)

    def unitary(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        gates = self._gates(x)
        U = self._eye
        for i, (_, G) in enumerate(gates):
            U = self._embed(i, G, x)[0] @ U
        return U

    def block_matrices(self, x) -> list[np.ndarray]:
        x = np.asarray(x, dtype=float)
        return [G for _, G in self._gates(x)]

    def distance(self, x, U_T) -> float:
        return distance(self.unitary(x), U_T)

    def objective_and_gradient(self, x, U_T) -> tuple[float, np.ndarray]:
        x = np.asarray(x, dtype=float)
        U_T = np.asarray(U_T)
        d = 2**self.n
        if U_T.shape != (d, d):
            raise ValueError(f"target shape {U_T.shape} does not match width {self.n}")
        k = len(self.slots)
        gates = self._gates(x)
        embedded = [self._embed(i, G, x) for i, (_, G) in enumerate(gates)]
        mats = [e[0] for e in embedded]

        # before[j] = M_{j-1}..M_0, after[j] = M_{k-1}..M_{j+1}
        before = [self._eye]
        for M in mats[:-1]:
            before.append(M @ before[-1])
        after = [self._eye] * k
        for j in range(k - 2, -1, -1):
            after[j] = after[j + 1] @ mats[j + 1]
        UTh = U_T.conj().T
        t = np.trace(UTh @ after[0] @ mats[0])
        abs_t = abs(t)
        f = 1.0 - abs_t / d
        grad = np.zeros(self.num_params)
        if abs_t == 0.0:
            # |Tr| is not differentiable at 0; use the zero subgradient
            return float(f), grad
        coef = -np.conj(t) / (abs_t * d)

        Ys: list = [None] * k
        for j, slot in enumerate(self.slots):
            Xj = before[j] @ UTh @ after[j]
            _, K, mix = embedded[j]
            r = d // 2**slot.m
            if mix is None:
                perm = self._perms[j][0]
                Zj = Xj[np.ix_(perm, perm)]
            else:
                s, S = mix
                Zj = S.T @ Xj @ S
                W1 = K @ S.T @ Xj
                W2 = Xj @ S @ K
                ar = np.arange(d)
                dt_ds = np.array([
                    W1[ar, perm].sum() + W2[perm, ar].sum() for perm in self._perms[j]
                ])
                dt_dl = s * (dt_ds - np.dot(s, dt_ds))
                grad[slot.l_slice] = np.real(coef * dt_dl)
            Ys[j] = Zj.reshape(2**slot.m, r, 2**slot.m, r).trace(axis1=1, axis2=3)

        by_m: dict[int, list[int]] = {}
        for j, slot in enumerate(self.slots):
            by_m.setdefault(slot.m, []).append(j)
        for m, idx in by_m.items():
            sig = pauli_basis(m).strings
            A = np.stack([gates[j][0] for j in idx])
            Y = np.stack([Ys[j] for j in idx])
            # Tr(Y L(A, E)) = Tr(L(A, Y) E) for the exponential map
            L = expm_frechet(A, Y)
            dt = 1j * np.einsum("jab,kba->jk", L, sig)
            for row, j in enumerate(idx):
                grad[self.slots[j].alpha_slice] = np.real(coef * dt[row])
        return float(f), grad


def objective_and_gradient(blocks: Sequence[Block], U_T) -> tuple[float, np.ndarray]:
    """Distance of the block circuit to ``U_T`` and its gradient.

    The gradient is taken with respect to every block's alpha (in block order)
    followed by the location logits of every variable block.
    """
    model, x = CircuitModel.from_blocks(blocks)
    return model.objective_and_gradient(x, U_T)


def parameter_count(blocks: Sequence[Block]) -> int:
    return sum(4**b.fn.m + (len(b.candidates) if isinstance(b, VariableBlock) else 0) for b in blocks)
