"""Reading and writing the OpenQASM 2.0 subset the router understands."""

from __future__ import annotations

import ast
import logging
import math
import operator
import re
from typing import Optional, Sequence

from .circuit import (
    GATE_ARITY, Circuit, CircuitError, Gate, PassthroughPlan, split_core,
)

log = logging.getLogger(__name__)

HEADER = 'OPENQASM 2.0;\ninclude "qelib1.inc";\n'

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_DECL = re.compile(r"^(qreg|creg)\s+([A-Za-z_][A-Za-z0-9_]*)\s*\[\s*(\d+)\s*\]$")
_ARG = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)\s*(?:\[\s*(\d+)\s*\])?$")
_MULTI_QUBIT = {"ccx": 3, "cswap": 3, "c3x": 4, "c4x": 5, "rccx": 3, "rc3x": 4}


class QasmError(ValueError):
    """Parse failure located at ``line``:``column`` (both 1-based)."""

    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.message, self.line, self.column = message, line, column
        super().__init__(f"{line}:{column}: {message}" if line else message)


_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}
_FUNCS = {"sin": math.sin, "cos": math.cos, "tan": math.tan, "exp": math.exp,
          "ln": math.log, "sqrt": math.sqrt}


def _eval(node):
    if isinstance(node, ast.Expression):
        return _eval(node.body)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
        return float(node.value)
    if isinstance(node, ast.Name) and node.id == "pi":
        return math.pi
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        v = _eval(node.operand)
        return -v if isinstance(node.op, ast.USub) else v
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        return _BINOPS[type(node.op)](_eval(node.left), _eval(node.right))
    if (isinstance(node, ast.Call) and isinstance(node.func, ast.Name)
            and node.func.id in _FUNCS and len(node.args) == 1 and not node.keywords):
        return _FUNCS[node.func.id](_eval(node.args[0]))
    raise ValueError("unsupported expression")


def eval_param(text: str) -> float:
    try:
        return float(_eval(ast.parse(text.strip().replace("^", "**"), mode="eval")))
    except (SyntaxError, ValueError, ZeroDivisionError, OverflowError, RecursionError) as exc:
        raise ValueError(f"bad parameter expression {text.strip()!r}") from exc


def _split_top(text: str) -> list[str]:
    """Split on commas that are not nested inside parentheses."""
    parts, depth, cur = [], 0, []
    for ch in text:
        if ch == "," and depth == 0:
            parts.append("".join(cur))
            cur = []
            continue
        depth += ch == "("
        depth -= ch == ")"
        cur.append(ch)
    parts.append("".join(cur))
    return parts


def _statements(text: str):
    """Yield (statement, line, column) with comments blanked out."""
    text = re.sub(r"//[^\n]*", lambda m: " " * len(m.group()), text)
    line_starts = [0] + [m.end() for m in re.finditer("\n", text)]

    def locate(offset):
        lo, hi = 0, len(line_starts) - 1
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if line_starts[mid] <= offset:
                lo = mid
            else:
                hi = mid - 1
        return lo + 1, offset - line_starts[lo] + 1

    start = 0
    for m in re.finditer(";", text):
        chunk = text[start:m.start()]
        stripped = chunk.strip()
        if stripped:
            off = start + len(chunk) - len(chunk.lstrip())
            yield stripped, *locate(off)
        start = m.end()
    tail = text[start:]
    if tail.strip():
        off = start + len(tail) - len(tail.lstrip())
        line, col = locate(off)
        raise QasmError("missing ';' at end of statement", line, col)


class _Program:
    def __init__(self):
        self.qregs: dict[str, tuple[int, int]] = {}  # name -> (size, offset)
        self.qreg_order: list[str] = []
        self.cregs: dict[str, int] = {}
        self.gates: list[Gate] = []
        self.measures: list[tuple[int, str, int]] = []
        self.measured: set[int] = set()
        self.barriers = 0

    @property
    def num_qubits(self):
        return sum(size for size, _ in self.qregs.values())

    def qubits(self, arg: str, where) -> list[int]:
        m = _ARG.match(arg.strip())
        if not m:
            raise QasmError(f"malformed argument {arg.strip()!r}", *where)
        name, idx = m.group(1), m.group(2)
        if name not in self.qregs:
            raise QasmError(f"unknown quantum register {name!r}", *where)
        size, offset = self.qregs[name]
        if idx is None:
            return [offset + i for i in range(size)]
        if int(idx) >= size:
            raise QasmError(f"qubit index {name}[{idx}] out of range (size {size})", *where)
        return [offset + int(idx)]

    def clbits(self, arg: str, where) -> list[tuple[str, int]]:
        m = _ARG.match(arg.strip())
        if not m or m.group(1) not in self.cregs:
            raise QasmError(f"unknown classical register in {arg.strip()!r}", *where)
        name, idx = m.group(1), m.group(2)
        size = self.cregs[name]
        if idx is None:
            return [(name, i) for i in range(size)]
        if int(idx) >= size:
            raise QasmError(f"bit index {name}[{idx}] out of range (size {size})", *where)
        return [(name, int(idx))]

    def add(self, gate: Gate, where):
        for q in gate.qubits:
            if q in self.measured:
                raise QasmError("gate after measurement is not supported", *where)
        self.gates.append(gate)


def _broadcast(groups: list[list[int]], where) -> list[tuple[int, ...]]:
    sizes = {len(g) for g in groups if len(g) > 1}
    if len(sizes) > 1:
        raise QasmError("register arguments differ in size", *where)
    n = sizes.pop() if sizes else 1
    return [tuple(g[i] if len(g) > 1 else g[0] for g in groups) for i in range(n)]


def _gate_statement(prog: _Program, stmt: str, where):
    m = _IDENT.match(stmt)
    if not m:
        raise QasmError(f"syntax error near {stmt[:20]!r}", *where)
    name, rest = m.group(), stmt[m.end():].lstrip()
    params: list[float] = []
    if rest.startswith("("):
        depth = 0
        for i, ch in enumerate(rest):
            depth += ch == "("
            depth -= ch == ")"
            if depth == 0:
                break
        if depth:
            raise QasmError("unbalanced parentheses", *where)
        try:
            params = [eval_param(p) for p in _split_top(rest[1:i])]
        except ValueError as exc:
            raise QasmError(str(exc), *where) from None
        rest = rest[i + 1:].strip()
    if name in _MULTI_QUBIT:
        raise QasmError(f"{_MULTI_QUBIT[name]}-qubit gate {name!r} must be decomposed first", *where)
    if name not in GATE_ARITY:
        raise QasmError(f"unsupported gate {name!r}", *where)
    if len(params) != GATE_ARITY[name]:
        raise QasmError(f"{name} expects {GATE_ARITY[name]} parameter(s), got {len(params)}", *where)
    args = _split_top(rest) if rest else []
    width = 2 if name == "cx" else 1
    if len(args) != width:
        if name != "cx" and len(args) >= 3:
            raise QasmError(f"{len(args)}-qubit gate must be decomposed first", *where)
        raise QasmError(f"{name} expects {width} argument(s), got {len(args)}", *where)
    for qs in _broadcast([prog.qubits(a, where) for a in args], where):
        try:
            prog.add(Gate(name, qs, tuple(params)), where)
        except CircuitError as exc:
            raise QasmError(str(exc), *where) from None


def read_qasm(text: str) -> tuple[Circuit, PassthroughPlan]:
    """Parse ``text`` keeping every gate in order.

    The returned plan carries register tables and measurements only; its
    passthrough list is empty.
    """
    prog = _Program()
    for n, (stmt, line, col) in enumerate(_statements(text)):
        where = (line, col)
        head = stmt.split(None, 1)[0]
        if head == "OPENQASM":
            if n != 0:
                raise QasmError("OPENQASM header must come first", *where)
            version = stmt.split(None, 1)[1].strip() if " " in stmt else ""
            if not version.startswith("2"):
                raise QasmError(f"unsupported OpenQASM version {version!r}", *where)
        elif head == "include":
            pass
        elif head in ("qreg", "creg"):
            m = _DECL.match(stmt)
            if not m:
                raise QasmError(f"malformed {head} declaration", *where)
            name, size = m.group(2), int(m.group(3))
            if name in prog.qregs or name in prog.cregs:
                raise QasmError(f"register {name!r} redeclared", *where)
            if size == 0:
                raise QasmError(f"register {name!r} has size 0", *where)
            if head == "qreg":
                prog.qregs[name] = (size, prog.num_qubits)
                prog.qreg_order.append(name)
            else:
                prog.cregs[name] = size
        elif head == "barrier":
            prog.barriers += 1
        elif head == "measure":
            parts = stmt[len("measure"):].split("->")
            if len(parts) != 2:
                raise QasmError("measure needs 'qubit -> bit'", *where)
            qs, cs = prog.qubits(parts[0], where), prog.clbits(parts[1], where)
            if len(qs) != len(cs):
                raise QasmError("measure register sizes differ", *where)
            for q, (cname, bit) in zip(qs, cs):
                prog.measures.append((q, cname, bit))
                prog.measured.add(q)
        elif head in ("gate", "opaque", "if", "reset"):
            raise QasmError(f"unsupported statement {head!r}", *where)
        else:
            _gate_statement(prog, stmt, where)
    if not prog.qregs:
        raise QasmError("no qreg declared")
    if prog.barriers:
        log.warning("dropped %d barrier statement(s)", prog.barriers)
    plan = PassthroughPlan(
        measures=prog.measures,
        cregs=list(prog.cregs.items()),
        qregs=[(name, *prog.qregs[name]) for name in prog.qreg_order],
        dropped_barriers=prog.barriers,
    )
    return Circuit(prog.num_qubits, prog.gates), plan


def parse_qasm(text: str) -> tuple[Circuit, PassthroughPlan]:
    """Parse a program into its CNOT-only core plus the stripped remainder."""
    full, meta = read_qasm(text)
    core, plan = split_core(full)
    plan.measures, plan.cregs, plan.qregs = meta.measures, meta.cregs, meta.qregs
    plan.dropped_barriers = meta.dropped_barriers
    return core, plan


def _fmt(gate: Gate, wires: Optional[Sequence[int]] = None) -> str:
    qs = gate.qubits if wires is None else [wires[q] for q in gate.qubits]
    args = ",".join(f"q[{q}]" for q in qs)
    if gate.params:
        return f"{gate.name}({','.join(repr(float(p)) for p in gate.params)}) {args};"
    return f"{gate.name} {args};"


def _declarations(num_qubits: int, plan: Optional[PassthroughPlan]) -> list[str]:
    lines = [f"qreg q[{num_qubits}];"]
    if plan is not None:
        lines += [f"creg {name}[{size}];" for name, size in plan.cregs]
    return lines


def dump_qasm(circuit: Circuit, plan: Optional[PassthroughPlan] = None) -> str:
    """Write ``circuit`` verbatim (one flat ``q`` register)."""
    lines = _declarations(circuit.num_qubits, plan)
    lines += [_fmt(g) for g in circuit.gates]
    if plan is not None:
        lines += [f"measure q[{q}] -> {c}[{b}];" for q, c, b in plan.measures]
    return HEADER + "".join(line + "\n" for line in lines)


def emit_qasm(pc: Circuit, plan: PassthroughPlan, tau_ini: Sequence[int],
              sigma: Sequence[int]) -> str:
    """Write a routed circuit with its passthrough gates re-attached.

    A passthrough anchored after source CNOT ``k`` goes on the wire that held
    its logical qubit when ``k`` was realized; unanchored ones go at the very
    start on their initial wire. Measurements follow the final placement
    ``sigma[tau_ini[q]]``.
    """
    anchored = plan.by_anchor()
    lines = _declarations(pc.num_qubits, plan)
    for p in anchored.get(None, []):
        lines.append(_fmt(p.gate, {p.qubit: tau_ini[p.qubit]}))
    at_position = {e.position: e for e in pc.executions}
    for i, g in enumerate(pc.gates):
        lines.append(_fmt(g))
        e = at_position.get(i + 1)
        if e is not None:
            for p in anchored.get(e.source, []):
                lines.append(_fmt(p.gate, {p.qubit: e.wire_of(p.qubit)}))
    for q, cname, bit in plan.measures:
        lines.append(f"measure q[{sigma[tau_ini[q]]}] -> {cname}[{bit}];")
    return HEADER + "".join(line + "\n" for line in lines)
