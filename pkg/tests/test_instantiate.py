import math

import numpy as np
import pytest

from blocksynth.benchmarks import toffoli
from blocksynth.circuitkit import Circuit, circuit_to_unitary
from blocksynth.decomposer import BlockList, DecomposeConfig, decompose
from blocksynth.errors import SynthesisError
from blocksynth.gatemodel import distance
from blocksynth.instantiate import (
    CX01,
    TemplateBackend,
    _template_objective,
    cnot_lower_bound,
    get_backend,
    instantiate_2q,
    instantiate_blocks,
    invariant_residuals,
    template_unitary,
)
from blocksynth.topology import Topology

from conftest import haar_unitary

SWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)
H = np.array([[1, 1], [1, -1]]) / math.sqrt(2)


def check(U, circuit, tol=1e-8):
    assert distance(circuit_to_unitary(circuit), U) <= tol


def test_identity_zero_cnots():
    c = instantiate_2q(np.eye(4))
    assert c.cnot_count == 0
    check(np.eye(4), c)


def test_local_gate_zero_cnots(rng):
    U = np.kron(haar_unitary(2, rng), haar_unitary(2, rng))
    c = instantiate_2q(U)
    assert c.cnot_count == 0
    check(U, c)


def test_cnot_one():
    c = instantiate_2q(CX01)
    assert c.cnot_count == 1
    check(CX01, c)


def test_reversed_cnot_one():
    U = np.kron(H, H) @ CX01 @ np.kron(H, H)
    c = instantiate_2q(U)
    assert c.cnot_count == 1
    check(U, c)


def test_swap_three():
    c = instantiate_2q(SWAP)
    assert c.cnot_count == 3
    check(SWAP, c)


def test_two_cnot_class(rng):
    # CX, a local layer, CX: generically exactly two CNOTs are needed
    L = np.kron(haar_unitary(2, rng), haar_unitary(2, rng))
    U = CX01 @ L @ CX01
    c = instantiate_2q(U)
    assert c.cnot_count == 2
    check(U, c)


def test_haar_random_three(rng):
    for _ in range(5):
        U = haar_unitary(4, rng)
        c = instantiate_2q(U, seed=int(rng.integers(1000)))
        assert c.cnot_count == 3
        check(U, c)


def test_invariants_classify_known_gates(rng):
    assert cnot_lower_bound(np.eye(4), 1e-6) == 0
    assert cnot_lower_bound(CX01, 1e-6) == 1
    assert cnot_lower_bound(SWAP, 1e-6) == 3
    assert cnot_lower_bound(haar_unitary(4, rng), 1e-6) == 3
    r = invariant_residuals(CX01 @ np.kron(haar_unitary(2, rng), haar_unitary(2, rng)) @ CX01)
    assert r[2] < 1e-12 < r[1]


def test_template_gradient(rng):
    U = haar_unitary(4, rng)
    for k in range(4):
        p = rng.uniform(-3, 3, 6 * (k + 1))
        f, g = _template_objective(p, k, U)
        assert abs(f - distance(template_unitary(p, k), U)) < 1e-14
        h = 1e-6
        fd = np.array([
            (_template_objective(p + h * e, k, U)[0] - _template_objective(p - h * e, k, U)[0]) / (2 * h)
            for e in np.eye(p.size)
        ])
        assert np.linalg.norm(g - fd) / np.linalg.norm(fd) < 1e-6


def test_single_qubit_block(rng):
    V = haar_unitary(2, rng)
    c = TemplateBackend().synthesize(V)
    assert c.n == 1 and c.u3_count == 1
    check(V, c, 1e-14)


def test_rejects_bad_shapes():
    with pytest.raises(ValueError):
        TemplateBackend().synthesize(np.eye(8))
    with pytest.raises(ValueError):
        instantiate_2q(np.eye(2))


def test_non_unitary_fails():
    with pytest.raises(SynthesisError):
        TemplateBackend(restarts=1, escalated_restarts=1).synthesize(np.diag([1, 1, 1, 0.5]))


def test_backend_registry():
    assert isinstance(get_backend("template2q"), TemplateBackend)
    with pytest.raises(ValueError):
        get_backend("kak")


def test_instantiate_blocks_edge_cases():
    assert instantiate_blocks(BlockList(3, [], 0.0)) == []
    out = instantiate_blocks(BlockList(3, [((0, 1), np.eye(4))], 0.0))
    assert len(out) == 1 and out[0].cnot_count == 0
    with pytest.raises(ValueError):
        instantiate_blocks(BlockList(3, [((0, 1, 2), np.eye(8))], 0.0))


def test_instantiate_blocks_deterministic_across_jobs(rng):
    blocks = [((0, 1), haar_unitary(4, rng)), ((1, 2), haar_unitary(4, rng))]
    bl = BlockList(3, blocks, 0.0)
    assert instantiate_blocks(bl, seed=3, jobs=1) == instantiate_blocks(bl, seed=3, jobs=2)


def test_block_errors_carry_index():
    bl = BlockList(3, [((0, 1), np.eye(4)), ((1, 2), np.diag([1, 1, 1, 0.5]))], 0.0)
    with pytest.raises(SynthesisError, match="block 1"):
        instantiate_blocks(bl, TemplateBackend(restarts=1, escalated_restarts=1))


@pytest.mark.slow
def test_toffoli_blocks_instantiate_exactly():
    bl = decompose(toffoli(), Topology.all_to_all(3), DecomposeConfig())
    for (_, M), c in zip(bl.blocks, instantiate_blocks(bl)):
        assert distance(circuit_to_unitary(c), M) <= 1e-8
        assert isinstance(c, Circuit) and c.n == 2
