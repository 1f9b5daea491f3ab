import itertools

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from blocksynth.gatemodel import (
    CircuitModel,
    FixedBlock,
    GateFunction,
    VariableBlock,
    circuit_product,
    distance,
    distance_frobenius,
    fixed_unitary,
    gate_unitary,
    objective_and_gradient,
    parameter_count,
    softmax,
    variable_unitary,
)
from blocksynth.numkit import maxnorm
from blocksynth.paulis import X, map_pauli, pauli_basis, pauli_string
from blocksynth.topology import Topology, locations

from conftest import haar_unitary

# S (I) S^T for S = (P_(0,1) + P_(1,2)) / 2 on three wires, built from hand
# relabelled basis states; entries are quarters
UNIFORM_MIX_IDENTITY = np.array([
    [4, 0, 0, 0, 0, 0, 0, 0],
    [0, 2, 1, 0, 1, 0, 0, 0],
    [0, 1, 2, 0, 1, 0, 0, 0],
    [0, 0, 0, 2, 0, 1, 1, 0],
    [0, 1, 1, 0, 2, 0, 0, 0],
    [0, 0, 0, 1, 0, 2, 1, 0],
    [0, 0, 0, 1, 0, 1, 2, 0],
    [0, 0, 0, 0, 0, 0, 0, 4],
]) / 4


def fn(m, alpha=None, rng=None):
    if alpha is None:
        alpha = rng.uniform(-1, 1, 4**m)
    return GateFunction(m, alpha)


def test_gate_identity():
    assert maxnorm(gate_unitary(GateFunction(2, np.zeros(16))) - np.eye(4)) <= 1e-15


def test_gate_single_pauli():
    th = 0.7
    G = gate_unitary(GateFunction(1, [0, th, 0, 0]))
    assert maxnorm(G - (np.cos(th) * np.eye(2) + 1j * np.sin(th) * X)) < 1e-14


def test_gate_direct_sum(rng):
    alpha = rng.uniform(-1, 1, 16)
    labels = ["".join(p) for p in itertools.product("IXYZ", repeat=2)]
    H = sum(a * pauli_string(lab) for a, lab in zip(alpha, labels))
    assert maxnorm(gate_unitary(GateFunction(2, alpha)) - scipy.linalg.expm(1j * H)) < 1e-12


def test_gate_function_validation():
    with pytest.raises(ValueError):
        GateFunction(2, np.zeros(15))
    with pytest.raises(ValueError):
        GateFunction(1, [0, np.inf, 0, 0])


def test_fixed_identity_and_trivial_location(rng):
    assert maxnorm(fixed_unitary(FixedBlock(GateFunction(2, np.zeros(16)), (0, 2), 3)) - np.eye(8)) <= 1e-15
    f = fn(2, rng=rng)
    assert maxnorm(fixed_unitary(FixedBlock(f, (0, 1), 2)) - gate_unitary(f)) == 0


@pytest.mark.parametrize("Q", [(0, 1), (0, 2), (1, 2)])
def test_fixed_matches_direct_mapping(Q, rng):
    f = fn(2, rng=rng)
    H = sum(a * map_pauli(Q, 3, s) for a, s in zip(f.alpha, pauli_basis(2).strings))
    assert maxnorm(fixed_unitary(FixedBlock(f, Q, 3)) - scipy.linalg.expm(1j * H)) <= 1e-10


def test_variable_singleton_is_fixed(rng):
    f = fn(2, rng=rng)
    v = VariableBlock(f, ((1, 2),), [3.7], 3)
    assert maxnorm(variable_unitary(v) - fixed_unitary(FixedBlock(f, (1, 2), 3))) < 1e-14


def test_variable_sharp_softmax(rng):
    f = fn(2, rng=rng)
    cands = ((0, 1), (0, 2), (1, 2))
    for k, Q in enumerate(cands):
        l = np.zeros(3)
        l[k] = 40.0
        v = VariableBlock(f, cands, l, 3)
        assert maxnorm(variable_unitary(v) - fixed_unitary(FixedBlock(f, Q, 3))) <= 1e-10


def test_variable_uniform_identity_is_not_identity():
    v = VariableBlock(GateFunction(2, np.zeros(16)), ((0, 1), (1, 2)), [0.0, 0.0], 3)
    assert maxnorm(variable_unitary(v) - UNIFORM_MIX_IDENTITY) < 1e-15


def test_variable_validation():
    with pytest.raises(ValueError):
        VariableBlock(GateFunction(2, np.zeros(16)), (), [], 3)
    with pytest.raises(ValueError):
        VariableBlock(GateFunction(2, np.zeros(16)), ((0, 1),), [0, 0], 3)
    with pytest.raises(ValueError):
        FixedBlock(GateFunction(2, np.zeros(16)), (0,), 3)


def test_softmax_cases(rng):
    assert np.allclose(softmax([0, 0]), [0.5, 0.5])
    assert np.array_equal(softmax([1000.0, 0.0]), [1.0, 0.0])
    s = softmax(rng.normal(size=5))
    assert np.all((s > 0) & (s < 1))
    assert abs(s.sum() - 1) <= 1e-15


def test_circuit_product(rng):
    assert np.array_equal(circuit_product([], 2), np.eye(4))
    A, B = haar_unitary(4, rng), haar_unitary(4, rng)
    assert np.array_equal(circuit_product([A], 2), A)
    # applying A then B to each basis state
    for j in range(4):
        e = np.zeros(4)
        e[j] = 1
        assert maxnorm(circuit_product([A, B], 2) @ e - B @ (A @ e)) < 1e-14
    with pytest.raises(ValueError):
        circuit_product([np.eye(2)], 2)


def test_distances(rng):
    U = haar_unitary(4, rng)
    assert distance(U, U) < 1e-15
    assert distance(U, np.exp(0.83j) * U) < 1e-15
    assert distance(np.eye(2), X) == 1.0
    assert abs(distance_frobenius(U, U)) < 1e-15
    assert abs(distance_frobenius(U, -U) - 2) < 1e-15
    assert abs(distance_frobenius(np.eye(2), 1j * np.eye(2)) - 1) < 1e-15
    assert distance(np.eye(2), 1j * np.eye(2)) < 1e-15
    with pytest.raises(ValueError):
        distance(np.eye(2), np.eye(4))


def test_objective_stationary_at_solution():
    f, g = objective_and_gradient([FixedBlock(GateFunction(2, np.zeros(16)), (0, 1), 3)], np.eye(8))
    assert abs(f) < 1e-15
    assert maxnorm(g) < 1e-12


def random_config(rng, n=3):
    cands = tuple(locations(Topology.all_to_all(n), 2))
    blocks = []
    for _ in range(2):
        f = fn(2, rng=rng)
        if rng.random() < 0.5:
            blocks.append(FixedBlock(f, cands[rng.integers(len(cands))], n))
        else:
            blocks.append(VariableBlock(f, cands, rng.normal(size=len(cands)), n))
    return blocks


def finite_difference(model, x, U_T, h=1e-6):
    g = np.zeros_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (model.objective_and_gradient(x + e, U_T)[0] - model.objective_and_gradient(x - e, U_T)[0]) / (2 * h)
    return g


def test_gradient_finite_difference(rng):
    for _ in range(5):
        blocks = random_config(rng)
        model, x = CircuitModel.from_blocks(blocks)
        U_T = haar_unitary(8, rng)
        _, g = model.objective_and_gradient(x, U_T)
        fd = finite_difference(model, x, U_T)
        assert np.linalg.norm(g - fd) / np.linalg.norm(fd) <= 1e-5


def test_objective_matches_distance(rng):
    blocks = random_config(rng)
    model, x = CircuitModel.from_blocks(blocks)
    U_T = haar_unitary(8, rng)
    f, _ = model.objective_and_gradient(x, U_T)
    U = np.eye(8)
    for b in blocks:
        U = (fixed_unitary(b) if isinstance(b, FixedBlock) else variable_unitary(b)) @ U
    assert abs(f - (1 - abs(np.trace(U_T.conj().T @ U)) / 8)) < 1e-12


def test_parameter_layout(rng):
    blocks = random_config(rng)
    model, x = CircuitModel.from_blocks(blocks)
    assert model.num_params == parameter_count(blocks)
    rebuilt = model.blocks(x)
    for a, b in zip(blocks, rebuilt):
        assert type(a) is type(b)
        assert np.array_equal(a.fn.alpha, b.fn.alpha)


def test_parameter_count_formula():
    v = VariableBlock(GateFunction(2, np.zeros(16)), tuple(locations(Topology.linear(4), 2)), np.zeros(3), 4)
    fixed = FixedBlock(GateFunction(1, np.zeros(4)), (0,), 4)
    assert parameter_count([v]) == 19
    assert parameter_count([v, fixed]) == 23


def test_block_matrices_are_gates(rng):
    model = CircuitModel.from_structure(3, [(2, ((0, 2),), False), (2, ((1, 2),), False)])
    x = rng.uniform(-1, 1, model.num_params)
    mats = model.block_matrices(x)
    assert maxnorm(mats[1] - gate_unitary(GateFunction(2, x[16:]))) < 1e-14


def test_model_unitary_is_block_product(rng):
    model = CircuitModel.from_structure(3, [(2, ((0, 2),), False), (1, ((1,),), False), (2, ((0, 1), (1, 2)), True)])
    x = rng.uniform(-1, 1, model.num_params)
    mats = [fixed_unitary(b) if isinstance(b, FixedBlock) else variable_unitary(b) for b in model.blocks(x)]
    assert maxnorm(model.unitary(x) - circuit_product(mats, 3)) < 1e-13


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_fixed_blocks_are_unitary(seed):
    rng = np.random.default_rng(seed)
    f = fn(2, rng=rng)
    Q = [(0, 1), (0, 2), (1, 2)][seed % 3]
    U = fixed_unitary(FixedBlock(f, Q, 3))
    assert maxnorm(U @ U.conj().T - np.eye(8)) < 1e-12


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_distance_bounds_and_symmetry(seed):
    rng = np.random.default_rng(seed)
    A, B = haar_unitary(4, rng), haar_unitary(4, rng)
    d = distance(A, B)
    assert 0 <= d <= 1
    assert abs(d - distance(B, A)) < 1e-14
