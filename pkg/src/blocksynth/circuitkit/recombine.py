"""Stitch per-block native circuits together and clean up block seams."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .circuit import CNOT, U3, Circuit, merge_u3

# a merged U3 this close to identity (phase-insensitive) is dropped
IDENTITY_TOL = 1e-14


def _is_identity(g: U3) -> bool:
    M = g.matrix()
    return 1.0 - abs(np.trace(M)) / 2.0 <= IDENTITY_TOL


def _peephole_pass(gates: Sequence) -> tuple[list, bool]:
    out: list = []
    last: dict[int, int | None] = {}
    changed = False
    for g in gates:
        if isinstance(g, U3):
            j = last.get(g.wire)
            if j is not None and isinstance(out[j], U3):
                out[j] = merge_u3(out[j], g)
                changed = True
                continue
            out.append(g)
            last[g.wire] = len(out) - 1
            continue
        jc, jt = last.get(g.control), last.get(g.target)
        if jc is not None and jc == jt and out[jc] == g:
            out[jc] = None
            # the gate before the cancelled pair is found on the next pass
            last[g.control] = last[g.target] = None
            changed = True
            continue
        out.append(g)
        last[g.control] = last[g.target] = len(out) - 1
    kept = []
    for g in out:
        if g is None:
            continue
        if isinstance(g, U3) and _is_identity(g):
            changed = True
            continue
        kept.append(g)
    return kept, changed


def peephole(c: Circuit) -> Circuit:
    """Merge same-wire U3 runs and cancel back-to-back CNOT pairs, to fixpoint."""
    gates = list(c.gates)
    changed = True
    while changed:
        gates, changed = _peephole_pass(gates)
    return Circuit(c.n, tuple(gates))


def concatenate(n: int, placed: Sequence[tuple[Sequence[int], Circuit]]) -> Circuit:
    """Relabel each sub-circuit's wire j to ``location[j]`` and concatenate."""
    gates: list = []
    for loc, sub in placed:
        if sub.n != len(loc):
            raise ValueError(f"sub-circuit width {sub.n} does not match location {tuple(loc)}")
        gates.extend(sub.relabel(tuple(loc), n).gates)
    return Circuit(n, tuple(gates))


def recombine(bl, subcircuits: Sequence[Circuit], optimize: bool = True) -> Circuit:
    """Assemble the full circuit for a block list from per-block circuits."""
    if len(subcircuits) != len(bl.blocks):
        raise ValueError(f"{len(bl.blocks)} blocks but {len(subcircuits)} sub-circuits")
    full = concatenate(bl.n, [(loc, sub) for (loc, _), sub in zip(bl.blocks, subcircuits)])
    return peephole(full) if optimize else full
