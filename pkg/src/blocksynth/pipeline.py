"""Decompose, instantiate and recombine: the whole flow for one target."""

from __future__ import annotations

import os
from dataclasses import dataclass, replace

import numpy as np

from .circuitkit import Circuit, circuit_to_unitary, recombine
from .decomposer import BlockList, DecomposeConfig, _check_target, decompose_hierarchical
from .errors import DepthLimitError
from .gatemodel import distance
from .instantiate import BackendInterface, TemplateBackend, instantiate_blocks
from .topology import Topology


@dataclass
class SynthesisResult:
    circuit: Circuit
    blocks: BlockList
    distance: float
    converged: bool


def default_jobs() -> int:
    return os.cpu_count() or 1


def synthesize(
    U_T,
    topology: Topology,
    cfg: DecomposeConfig = DecomposeConfig(),
    backend: BackendInterface | None = None,
    native_threshold: float = 1e-8,
    jobs: int = 1,
) -> SynthesisResult:
    """Full synthesis of ``U_T`` on ``topology``.

    A depth-limit failure is not raised: the best partial block list is
    instantiated and the result is marked unconverged.
    """
    backend = backend or TemplateBackend()
    n = topology.n
    U_T = _check_target(U_T, n)
    if n <= backend.arity:
        # the target is itself a native block
        bl = BlockList(n, [(tuple(range(n)), U_T)], 0.0, True, [], [cfg.threshold])
    else:
        cfg = replace(cfg, block_size=min(cfg.block_size, n - 1))
        try:
            bl = decompose_hierarchical(U_T, topology, cfg, native_size=min(backend.arity, cfg.block_size))
        except DepthLimitError as exc:
            bl = exc.best
    subs = instantiate_blocks(bl, backend, native_threshold, cfg.seed, jobs)
    circuit = recombine(bl, subs)
    d = distance(circuit_to_unitary(circuit), U_T)
    return SynthesisResult(circuit, bl, d, bl.converged and d <= cfg.threshold)
