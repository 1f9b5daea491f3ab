"""Layer-by-layer decomposition of a unitary into generic blocks.

Each layer appends one variable-location block to the fixed prefix, optimizes
every parameter (prefix functions included), pins the new block to the
location with the largest softmax weight and re-optimizes.  If the pinned
result does not beat the previous layer by more than the plateau slack, that
location is dropped from the head's candidates and the layer is retried.  A
layer whose candidates are all exhausted keeps its best attempt, so the
distance never increases from one layer to the next.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .errors import DepthLimitError
from .gatemodel import CircuitModel, circuit_product, distance
from .numkit import is_unitary
from .optimizer import MinimizeOptions, minimize
from .paulis import Location, qubit_permutation
from .topology import Topology, locations

log = logging.getLogger(__name__)

ALPHA_INIT = 0.1


@dataclass(frozen=True)
class DecomposeConfig:
    block_size: int = 2
    threshold: float = 1e-3
    max_layers: int = 30
    restarts_per_layer: int = 1
    # None selects max(1e-3 * previous distance, 1e-6)
    plateau_slack: float | None = None
    seed: int = 0
    # new head functions start i.i.d. uniform in [-alpha_init, alpha_init]
    alpha_init: float = ALPHA_INIT
    # "cold": all functions re-drawn every layer; "warm": prefix keeps the
    # previous layer's solution; "both": one warm and one cold run per restart
    prefix_init: str = "warm"
    optimizer: MinimizeOptions = field(default_factory=MinimizeOptions)

    def __post_init__(self):
        if self.block_size < 1:
            raise ValueError("block_size must be positive")
        if not 0 < self.threshold < 1:
            raise ValueError("threshold must lie in (0, 1)")
        if self.max_layers < 1 or self.restarts_per_layer < 1:
            raise ValueError("max_layers and restarts_per_layer must be positive")
        if self.prefix_init not in ("cold", "warm", "both"):
            raise ValueError(f"unknown prefix_init {self.prefix_init!r}")

    def slack(self, previous: float) -> float:
        if self.plateau_slack is not None:
            return self.plateau_slack
        return max(1e-3 * previous, 1e-6)


@dataclass
class BlockList:
    n: int
    blocks: list[tuple[Location, np.ndarray]]
    achieved_distance: float
    converged: bool = True
    # distance after each accepted layer (top level only)
    history: list[float] = field(default_factory=list)
    level_thresholds: list[float] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.blocks)

    def unitary(self) -> np.ndarray:
        return circuit_product([embed(M, loc, self.n) for loc, M in self.blocks], self.n)


def embed(M: np.ndarray, loc: Sequence[int], n: int) -> np.ndarray:
    """Full-width matrix of an m-qubit operator acting on ``loc``."""
    M = np.asarray(M)
    rest = 2**n // M.shape[0]
    P = qubit_permutation(tuple(loc), n)
    K = np.kron(M, np.eye(rest)) if rest > 1 else M
    return P @ K @ P.T


def _check_target(U_T, n: int) -> np.ndarray:
    U_T = np.asarray(U_T, dtype=np.complex128)
    if U_T.shape != (2**n, 2**n):
        raise ValueError(f"target shape {U_T.shape} does not match a {n}-qubit topology")
    if not is_unitary(U_T, 1e-8):
        raise ValueError("target is not unitary (tolerance 1e-8)")
    return U_T


def _least_recent(attempts, fixed: list[Location], slack: float):
    """Lowest-distance attempt, except that near-ties (within ``slack``) go to
    the location used least recently; stalled layers then spread over the
    topology instead of piling onto one pair."""
    fmin = min(a[0] for a in attempts)
    ties = [a for a in attempts if a[0] <= fmin + slack]

    def last_use(a):
        hits = [i for i, q in enumerate(fixed) if q == a[1]]
        return hits[-1] if hits else -1

    return min(ties, key=lambda a: (last_use(a), a[0]))


def decompose(U_T, t: Topology, cfg: DecomposeConfig = DecomposeConfig(), *, _path: tuple[int, ...] = ()) -> BlockList:
    """Grow a circuit of fixed-location generic blocks until within threshold.

    Raises ``DepthLimitError`` (carrying the best block list) if ``max_layers``
    layers do not reach ``cfg.threshold``.
    """
    n = t.n
    U_T = _check_target(U_T, n)
    m = cfg.block_size
    if m >= n:
        raise ValueError(f"block size {m} must be smaller than the circuit width {n}")
    candidates = locations(t, m)
    if not candidates:
        raise ValueError(f"topology {t.name} has no connected {m}-qubit locations")

    fixed: list[Location] = []
    x = np.zeros(0)
    prev = distance(np.eye(2**n), U_T)
    history = [prev]
    opts = cfg.optimizer

    def result(converged: bool) -> BlockList:
        model = CircuitModel.from_structure(n, [(m, (q,), False) for q in fixed]) if fixed else None
        mats = model.block_matrices(x) if model else []
        bl = BlockList(n, list(zip(fixed, mats)), 0.0, converged, list(history), [cfg.threshold])
        bl.achieved_distance = distance(bl.unitary(), U_T)
        return bl

    if prev <= cfg.threshold:
        return result(True)

    for layer in range(cfg.max_layers):
        # a head on the previous block's location could be absorbed by it
        remaining = [q for q in candidates if not fixed or q != fixed[-1]] or list(candidates)
        attempts: list[tuple[float, Location, np.ndarray]] = []
        accepted = None
        while remaining:
            outcomes = []
            starts = []
            for restart in range(cfg.restarts_per_layer):
                rng = np.random.default_rng([cfg.seed, *_path, layer, len(attempts), restart])
                fresh = rng.uniform(-cfg.alpha_init, cfg.alpha_init, x.size + 4**m)
                if cfg.prefix_init in ("warm", "both"):
                    starts.append(np.concatenate([x, fresh[x.size:]]))
                if cfg.prefix_init in ("cold", "both"):
                    starts.append(fresh)
            for restart, alphas in enumerate(starts):
                structure = [(m, (q,), False) for q in fixed] + [(m, tuple(remaining), True)]
                model = CircuitModel.from_structure(n, structure)
                x0 = np.concatenate([alphas, np.zeros(len(remaining))])
                res = minimize(lambda p: model.objective_and_gradient(p, U_T), x0, opts)
                logits = res.x[model.slots[-1].l_slice]
                loc = remaining[int(np.argmax(logits))]

                pinned = CircuitModel.from_structure(n, [(m, (q,), False) for q in fixed + [loc]])
                res2 = minimize(lambda p: pinned.objective_and_gradient(p, U_T), res.x[: pinned.num_params], opts)
                log.debug("layer %d restart %d: soft %.3g -> %s pinned %.3g", layer, restart, res.f, loc, res2.f)
                outcomes.append((res2.f, loc, res2.x))
            best = _least_recent(outcomes, fixed, cfg.slack(prev))
            attempts.append(best)
            if best[0] < prev - cfg.slack(prev):
                accepted = best
                break
            # plateau: forbid this location for the head and retry
            remaining.remove(best[1])
        if accepted is None:
            accepted = _least_recent(attempts, fixed, cfg.slack(prev))
            if accepted[0] > prev:
                # every attempt regressed; an identity head reproduces the prefix exactly
                accepted = (prev, accepted[1], np.concatenate([x, np.zeros(4**m)]))
        f, loc, x = accepted
        fixed.append(loc)
        prev = f
        history.append(f)
        log.info("layer %d: block at %s, distance %.3e", layer + 1, loc, f)
        if f <= cfg.threshold:
            return result(True)

    best = result(False)
    raise DepthLimitError(
        f"no solution within {cfg.max_layers} layers (best distance {best.achieved_distance:.3e})", best
    )


def decompose_hierarchical(U_T, t: Topology, cfg: DecomposeConfig = DecomposeConfig(), native_size: int = 2, *, _path: tuple[int, ...] = ()) -> BlockList:
    """Decompose, then recursively decompose blocks larger than ``native_size``.

    Each block is re-decomposed on the subgraph of ``t`` induced by its
    qubits, with block size one smaller per level; inner locations are mapped
    back through the parent location, so every emitted location is valid in
    ``t``.  The threshold applies per level.

    On a depth-limit failure anywhere in the hierarchy the whole tree is still
    expanded from the best partial results, and the raised ``DepthLimitError``
    carries that fully native best-effort list.
    """
    if native_size < 1 or native_size > cfg.block_size:
        raise ValueError("need 1 <= native_size <= block_size")
    failure = None
    try:
        bl = decompose(U_T, t, cfg, _path=_path)
    except DepthLimitError as exc:
        failure, bl = str(exc), exc.best
    if cfg.block_size > native_size:
        inner_cfg = replace(cfg, block_size=cfg.block_size - 1)
        out: list[tuple[Location, np.ndarray]] = []
        converged = bl.converged
        levels = [inner_cfg.threshold]
        for i, (loc, M) in enumerate(bl.blocks):
            try:
                sub = decompose_hierarchical(M, t.induced(loc), inner_cfg, native_size, _path=_path + (i,))
            except DepthLimitError as exc:
                failure = failure or f"block {i} at {loc}: {exc}"
                sub = exc.best
            converged = converged and sub.converged
            levels = sub.level_thresholds
            for inner_loc, inner_M in sub.blocks:
                out.append((tuple(loc[j] for j in inner_loc), inner_M))
        bl = BlockList(t.n, out, 0.0, converged, bl.history, [cfg.threshold] + levels)
        bl.achieved_distance = distance(bl.unitary(), np.asarray(U_T))
    if failure is not None:
        bl.converged = False
        raise DepthLimitError(failure, bl)
    return bl
