from .circuit import (
    CNOT,
    U3,
    Circuit,
    NativeCircuit,
    apply_circuit,
    canonical_angles,
    circuit_to_unitary,
    merge_u3,
    u3_matrix,
    zyz_angles,
)
from .metrics import METRICS_HEADER, Metrics, metrics
from .qasm import emit_qasm, parse_qasm
from .recombine import concatenate, peephole, recombine

__all__ = [
    "CNOT",
    "U3",
    "Circuit",
    "NativeCircuit",
    "apply_circuit",
    "canonical_angles",
    "circuit_to_unitary",
    "merge_u3",
    "u3_matrix",
    "zyz_angles",
    "METRICS_HEADER",
    "Metrics",
    "metrics",
    "emit_qasm",
    "parse_qasm",
    "concatenate",
    "peephole",
    "recombine",
]
