"""Command-line driver: ``blocksynth synth|verify|metrics|bench``."""

from __future__ import annotations

import argparse
import logging
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import benchmarks
from .circuitkit import METRICS_HEADER, Metrics, circuit_to_unitary, emit_qasm, metrics, parse_qasm
from .decomposer import DecomposeConfig
from .errors import QasmParseError, ResourceLimitError, SynthesisError
from .gatemodel import distance, distance_frobenius
from .instantiate import BACKENDS, get_backend
from .numkit import is_unitary
from .pipeline import default_jobs, synthesize
from .topology import Topology

log = logging.getLogger("blocksynth")

UNITARY_TOL = 1e-6


class UsageError(Exception):
    pass


# unitary files ---------------------------------------------------------------


def format_unitary(U) -> str:
    U = np.asarray(U, dtype=np.complex128)
    lines = [f"dim {U.shape[0]}"]
    for row in U:
        lines.append(" ".join(f"{z.real:.17g} {z.imag:.17g}" for z in row))
    return "\n".join(lines) + "\n"


def write_unitary(path, U) -> None:
    Path(path).write_text(format_unitary(U))


def parse_unitary(text: str) -> np.ndarray:
    lines = [ln.split() for ln in text.splitlines() if ln.strip()]
    if not lines or len(lines[0]) != 2 or lines[0][0] != "dim":
        raise ValueError("first line must be 'dim <d>'")
    try:
        d = int(lines[0][1])
    except ValueError:
        raise ValueError(f"bad dimension {lines[0][1]!r}") from None
    if d < 2 or d & (d - 1):
        raise ValueError(f"dimension {d} is not a power of two >= 2")
    rows = lines[1:]
    if len(rows) != d:
        raise ValueError(f"expected {d} rows, found {len(rows)}")
    U = np.empty((d, d), dtype=np.complex128)
    for i, row in enumerate(rows):
        if len(row) != 2 * d:
            raise ValueError(f"row {i + 1} has {len(row)} numbers, expected {2 * d}")
        vals = np.array([float(v) for v in row])
        U[i] = vals[0::2] + 1j * vals[1::2]
    if not np.all(np.isfinite(U)):
        raise ValueError("matrix has non-finite entries")
    if not is_unitary(U, UNITARY_TOL):
        raise ValueError(f"matrix is not unitary within {UNITARY_TOL:g}")
    return U


def read_unitary(path) -> np.ndarray:
    return parse_unitary(Path(path).read_text())


def num_qubits(U) -> int:
    return int(U.shape[0]).bit_length() - 1


# reports ---------------------------------------------------------------------


@dataclass
class RunReport:
    input: str
    topology: str
    block_size: int
    threshold: float
    distance: float
    metrics: Metrics
    wall_time: float
    seed: int
    converged: bool = True

    def key_values(self) -> list[tuple[str, str]]:
        m = self.metrics
        return [
            ("input", self.input),
            ("topology", self.topology),
            ("block_size", str(self.block_size)),
            ("threshold", f"{self.threshold:g}"),
            ("seed", str(self.seed)),
            ("converged", str(self.converged).lower()),
            ("distance", f"{self.distance:.6e}"),
            ("cnots", str(m.cnot_count)),
            ("u3s", str(m.u3_count)),
            ("depth", str(m.depth)),
            ("parallelism", f"{m.parallelism:.4f}"),
            ("wall_time_s", f"{self.wall_time:.2f}"),
        ]

    def table_row(self, name: str | None = None) -> str:
        return f"{name or self.input:<16s} {self.metrics.row()} {self.distance:>10.3e} {self.wall_time:>9.2f}"

    def render(self) -> str:
        kv = "\n".join(f"{k}: {v}" for k, v in self.key_values())
        return f"{kv}\n\n{TABLE_HEADER}\n{self.table_row(Path(self.input).name)}\n"


TABLE_HEADER = f"{'name':<16s} {METRICS_HEADER} {'distance':>10s} {'time_s':>9s}"


# commands --------------------------------------------------------------------


def _topology(args, n: int) -> Topology:
    if getattr(args, "coupling", None):
        return Topology.from_file(args.coupling, n)
    if args.topology == "all":
        return Topology.all_to_all(n)
    return Topology.linear(n)


def _config(args) -> DecomposeConfig:
    return DecomposeConfig(
        block_size=args.block_size,
        threshold=args.threshold,
        restarts_per_layer=args.restarts,
        seed=args.seed,
    )


def _run(U, args, source: str) -> tuple[RunReport, str]:
    t = _topology(args, num_qubits(U))
    start = time.perf_counter()
    res = synthesize(U, t, _config(args), get_backend(args.backend), args.native_threshold, args.jobs)
    elapsed = time.perf_counter() - start
    report = RunReport(source, t.name, args.block_size, args.threshold, res.distance, metrics(res.circuit), elapsed, args.seed, res.converged)
    return report, emit_qasm(res.circuit)


def cmd_synth(args) -> int:
    U = read_unitary(args.input)
    report, qasm = _run(U, args, args.input)
    out = args.out or str(Path(args.input).with_suffix(".qasm"))
    Path(out).write_text(qasm)
    text = report.render()
    if args.report:
        Path(args.report).write_text(text)
    print(text, end="")
    if not report.converged:
        print(f"warning: best effort only, distance {report.distance:.3e} > {args.threshold:g}", file=sys.stderr)
        return 2
    return 0


def state_fidelities(U_C, U_T, k: int, rng: np.random.Generator) -> np.ndarray:
    """|<U_T psi|U_C psi>|^2 over all basis states followed by k Haar states."""
    W = np.asarray(U_T).conj().T @ np.asarray(U_C)
    basis = np.abs(np.diag(W)) ** 2
    d = W.shape[0]
    psi = rng.normal(size=(d, k)) + 1j * rng.normal(size=(d, k))
    psi /= np.linalg.norm(psi, axis=0)
    rand = np.abs(np.einsum("ik,ij,jk->k", psi.conj(), W, psi)) ** 2
    return np.concatenate([basis, rand])


def cmd_verify(args) -> int:
    c = parse_qasm(Path(args.circuit).read_text())
    U_T = read_unitary(args.target)
    if 2**c.n != U_T.shape[0]:
        raise UsageError(f"circuit has {c.n} qubits but target has dimension {U_T.shape[0]}")
    U_C = circuit_to_unitary(c)
    d = distance(U_C, U_T)
    fid = state_fidelities(U_C, U_T, args.random_states, np.random.default_rng(args.seed))
    print(f"distance: {d:.6e}")
    print(f"distance_frobenius: {distance_frobenius(U_C, U_T):.6e}")
    print(f"states: {fid.size}")
    print(f"min_fidelity: {fid.min():.8f}")
    print(f"avg_fidelity: {fid.mean():.8f}")
    ok = d <= args.tol
    print("result: pass" if ok else "result: fail")
    return 0 if ok else 1


def cmd_metrics(args) -> int:
    c = parse_qasm(Path(args.circuit).read_text())
    print(METRICS_HEADER)
    print(metrics(c).row())
    return 0


def cmd_bench(args) -> int:
    targets = benchmarks.suite(args.suite)
    lines = [TABLE_HEADER + f" {'trotter':>8s}"]
    failed = 0
    for name, U in targets:
        report, _ = _run(U, args, name)
        failed += not report.converged
        trotter = ""
        if name.startswith("tfim-"):
            _, n, k = name.split("-")
            trotter = str(benchmarks.trotter_cnots(int(n), int(k)))
        lines.append(report.table_row(name) + f" {trotter:>8s}")
        log.info("%s done", name)
    head = [
        f"suite: {args.suite}",
        f"topology: {args.coupling or args.topology}",
        f"block_size: {args.block_size}",
        f"threshold: {args.threshold:g}",
        f"seed: {args.seed}",
        f"unconverged: {failed}",
    ]
    text = "\n".join(head) + "\n\n" + "\n".join(lines) + "\n"
    if args.report:
        Path(args.report).write_text(text)
    print(text, end="")
    return 2 if failed else 0


# argument parsing ------------------------------------------------------------


def _add_synthesis_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--topology", choices=["all", "linear"], default="all")
    p.add_argument("--coupling", help="edge list file, one 'i j' pair per line (overrides --topology)")
    p.add_argument("--block-size", type=int, default=2)
    p.add_argument("--threshold", type=float, default=1e-3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--restarts", type=int, default=1, help="random restarts per layer")
    p.add_argument("--report", help="write the run report here")
    p.add_argument("--backend", choices=sorted(BACKENDS), default="template2q")
    p.add_argument("--native-threshold", type=float, default=1e-8)
    p.add_argument("--jobs", type=int, default=default_jobs(), help="worker processes for instantiation")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="blocksynth", description="Synthesize circuits from unitaries with generic blocks.")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="synthesize a circuit for a unitary file")
    p.add_argument("--in", dest="input", required=True, help="unitary file")
    p.add_argument("--out", help="QASM output path (default: input with .qasm suffix)")
    _add_synthesis_flags(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("verify", help="compare a QASM circuit with a target unitary")
    p.add_argument("--circuit", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--tol", type=float, default=1e-3)
    p.add_argument("--random-states", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("metrics", help="print gate metrics of a QASM circuit")
    p.add_argument("--circuit", required=True)
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("bench", help="synthesize a built-in benchmark suite")
    p.add_argument("--suite", default="small")
    _add_synthesis_flags(p)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on bad usage; 2 means best effort here
        return 0 if exc.code == 0 else 1
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (OSError, ValueError, UsageError, QasmParseError, SynthesisError, ResourceLimitError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
