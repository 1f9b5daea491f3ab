"""OpenQASM 2.0 emitter and a parser for the single-register subset.

Accepted gates: u1, u2, u3, U, rz, rx, ry, h, x, cx, CX.  One-qubit gates are
normalized to U3 on load (rz and u1 differ only by a global phase).  A
``creg`` declaration is accepted and ignored; measurement, reset, barriers,
``if`` and gate definitions are rejected.
"""

from __future__ import annotations

import ast
import math
import operator
import re

from ..errors import QasmParseError
from .circuit import CNOT, U3, Circuit

HEADER = 'OPENQASM 2.0;\ninclude "qelib1.inc";\n'


def _fmt(a: float) -> str:
    return format(float(a), ".17g")


def emit_qasm(c: Circuit) -> str:
    lines = [HEADER.rstrip("\n"), f"qreg q[{c.n}];"]
    for g in c.gates:
        if isinstance(g, U3):
            lines.append(f"u3({_fmt(g.theta)},{_fmt(g.phi)},{_fmt(g.lam)}) q[{g.wire}];")
        else:
            lines.append(f"cx q[{g.control}],q[{g.target}];")
    return "\n".join(lines) + "\n"


_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}
_FUNCS = {"sin": math.sin, "cos": math.cos, "tan": math.tan, "exp": math.exp, "ln": math.log, "sqrt": math.sqrt}


def _eval_angle(expr: str, line: int) -> float:
    try:
        tree = ast.parse(expr.strip().replace("^", "**"), mode="eval")
    except SyntaxError:
        raise QasmParseError(f"bad angle expression {expr!r}", line) from None

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id in _FUNCS and len(node.args) == 1:
            return _FUNCS[node.func.id](ev(node.args[0]))
        raise QasmParseError(f"unsupported angle expression {expr!r}", line)

    try:
        return float(ev(tree))
    except (ZeroDivisionError, OverflowError, ValueError) as exc:
        if isinstance(exc, QasmParseError):
            raise
        raise QasmParseError(f"cannot evaluate {expr!r}: {exc}", line) from None


def _one_qubit(name: str, params: list[float]) -> tuple[float, float, float]:
    pi = math.pi
    if name in ("u3", "U"):
        return params[0], params[1], params[2]
    if name == "u2":
        return pi / 2, params[0], params[1]
    if name in ("u1", "rz"):
        return 0.0, 0.0, params[0]
    if name == "rx":
        return params[0], -pi / 2, pi / 2
    if name == "ry":
        return params[0], 0.0, 0.0
    if name == "h":
        return pi / 2, 0.0, pi
    if name == "x":
        return pi, 0.0, pi
    raise KeyError(name)


_ARITY = {"u3": 3, "U": 3, "u2": 2, "u1": 1, "rz": 1, "rx": 1, "ry": 1, "h": 0, "x": 0, "cx": 0, "CX": 0}
_REJECT = {"measure", "reset", "barrier", "if", "gate", "opaque"}

_STMT = re.compile(r"^(?P<name>[A-Za-z_][A-Za-z0-9_]*)\s*(?:\((?P<params>.*)\))?\s*(?P<args>.*)$", re.S)
_ARG = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)\s*(?:\[\s*(\d+)\s*\])?$")


def _statements(text: str):
    """Yield ``(line_number, statement)`` with comments removed."""
    text = re.sub(r"//[^\n]*", "", text)
    buf: list[str] = []
    start = None
    line = 1
    for ch in text:
        if ch == "\n":
            line += 1
        if ch == ";":
            stmt = "".join(buf).strip()
            if stmt:
                yield start or line, stmt
            buf, start = [], None
            continue
        if start is None and not ch.isspace():
            start = line
        buf.append(ch)
    if "".join(buf).strip():
        raise QasmParseError("missing ';' at end of input", start)


def parse_qasm(text: str) -> Circuit:
    qreg: tuple[str, int] | None = None
    gates: list = []
    saw_header = False
    for line, stmt in _statements(text):
        head = stmt.split(None, 1)[0]
        if head.startswith("OPENQASM"):
            if not re.fullmatch(r"OPENQASM\s+2(\.0)?", stmt):
                raise QasmParseError(f"unsupported version: {stmt}", line)
            saw_header = True
            continue
        if head == "include":
            continue
        if head == "qreg":
            m = re.fullmatch(r"qreg\s+([A-Za-z_][A-Za-z0-9_]*)\s*\[\s*(\d+)\s*\]", stmt)
            if not m:
                raise QasmParseError(f"bad qreg declaration: {stmt}", line)
            if qreg is not None:
                raise QasmParseError("only a single quantum register is supported", line)
            qreg = (m.group(1), int(m.group(2)))
            if qreg[1] <= 0:
                raise QasmParseError("register size must be positive", line)
            continue
        if head == "creg":
            continue
        name_m = re.match(r"[A-Za-z_][A-Za-z0-9_]*", stmt)
        name = name_m.group(0) if name_m else stmt
        if name in _REJECT or stmt.startswith("if"):
            raise QasmParseError(f"unsupported construct '{name}'", line)
        if name not in _ARITY:
            raise QasmParseError(f"unsupported gate '{name}'", line)
        if qreg is None:
            raise QasmParseError("gate before qreg declaration", line)
        m = _STMT.match(stmt)
        if not m:
            raise QasmParseError(f"cannot parse statement: {stmt}", line)
        raw_params = m.group("params")
        params = [_eval_angle(p, line) for p in raw_params.split(",")] if raw_params and raw_params.strip() else []
        if len(params) != _ARITY[name]:
            raise QasmParseError(f"'{name}' takes {_ARITY[name]} parameters, got {len(params)}", line)
        operands = []
        for arg in (a.strip() for a in m.group("args").split(",")):
            am = _ARG.match(arg)
            if not am or am.group(1) != qreg[0]:
                raise QasmParseError(f"unknown operand {arg!r}", line)
            if am.group(2) is None:
                operands.append(None)  # whole register
                continue
            idx = int(am.group(2))
            if idx >= qreg[1]:
                raise QasmParseError(f"qubit index {idx} out of range", line)
            operands.append(idx)
        if name in ("cx", "CX"):
            if len(operands) != 2 or None in operands:
                raise QasmParseError("cx needs two indexed qubit operands", line)
            if operands[0] == operands[1]:
                raise QasmParseError("cx control equals target", line)
            gates.append(CNOT(operands[0], operands[1]))
            continue
        if len(operands) != 1:
            raise QasmParseError(f"'{name}' takes one qubit operand", line)
        angles = _one_qubit(name, params)
        wires = range(qreg[1]) if operands[0] is None else [operands[0]]
        gates.extend(U3(*angles, w) for w in wires)
    if not saw_header:
        raise QasmParseError("missing OPENQASM 2.0 header", 1)
    if qreg is None:
        raise QasmParseError("no qreg declaration", None)
    return Circuit(qreg[1], tuple(gates))
