"""Circuit intermediate representation.

A circuit is an ordered gate list over one flat qubit index space. The
routing core only ever sees CNOTs; single-qubit gates ride along in a
:class:`PassthroughPlan` and are re-attached when the physical circuit is
emitted.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

SOURCE = "source"
INSERTED = "inserted"

SINGLE_QUBIT_GATES = frozenset(
    {"h", "x", "y", "z", "s", "sdg", "t", "tdg", "u1", "u2", "u3", "rx", "ry", "rz"}
)
# number of real parameters each supported gate takes
GATE_ARITY = {
    "cx": 0, "h": 0, "x": 0, "y": 0, "z": 0, "s": 0, "sdg": 0, "t": 0, "tdg": 0,
    "u1": 1, "u2": 2, "u3": 3, "rx": 1, "ry": 1, "rz": 1,
}


class CircuitError(ValueError):
    pass


@dataclass(frozen=True)
class Gate:
    """A gate application. ``name`` is the lower-case OpenQASM gate name."""

    name: str
    qubits: tuple[int, ...]
    params: tuple[float, ...] = ()
    origin: str = SOURCE

    def __post_init__(self):
        if self.name == "cx":
            if len(self.qubits) != 2:
                raise CircuitError("cx takes exactly two qubits")
            if self.qubits[0] == self.qubits[1]:
                raise CircuitError(f"cx control equals target ({self.qubits[0]})")
        elif len(self.qubits) != 1:
            raise CircuitError(f"{self.name} must act on a single qubit")

    @property
    def is_cnot(self) -> bool:
        return self.name == "cx"

    @property
    def control(self) -> int:
        return self.qubits[0]

    @property
    def target(self) -> int:
        return self.qubits[-1]

    def relabel(self, wires: Sequence[int], origin: Optional[str] = None) -> "Gate":
        return Gate(self.name, tuple(wires[q] for q in self.qubits), self.params,
                    self.origin if origin is None else origin)

    def __repr__(self):
        args = ",".join(map(str, self.qubits))
        tag = "" if self.origin == SOURCE else "*"
        if self.params:
            return f"{self.name}({','.join(f'{p:g}' for p in self.params)}){tag} {args}"
        return f"{self.name}{tag} {args}"


def cnot(control: int, target: int, origin: str = SOURCE) -> Gate:
    return Gate("cx", (control, target), (), origin)


def hadamard(qubit: int, origin: str = SOURCE) -> Gate:
    return Gate("h", (qubit,), (), origin)


class Execution(NamedTuple):
    """Where a source CNOT was realized in a physical gate list.

    ``position`` is the index just past the last physical gate of the block
    that realized source gate ``source``; ``control_wire``/``target_wire``
    are the physical wires holding its logical ``control``/``target`` at
    that moment.
    """

    source: int
    position: int
    control: int
    target: int
    control_wire: int
    target_wire: int

    def wire_of(self, qubit: int) -> int:
        if qubit == self.control:
            return self.control_wire
        if qubit == self.target:
            return self.target_wire
        raise KeyError(qubit)


@dataclass(frozen=True)
class Circuit:
    num_qubits: int
    gates: tuple[Gate, ...] = ()
    space: str = "logical"
    executions: tuple[Execution, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        object.__setattr__(self, "executions", tuple(self.executions))
        if self.space not in ("logical", "physical"):
            raise CircuitError(f"unknown qubit space {self.space!r}")
        for g in self.gates:
            for q in g.qubits:
                if not 0 <= q < self.num_qubits:
                    raise CircuitError(f"{g!r}: qubit {q} out of range 0..{self.num_qubits - 1}")

    def __len__(self):
        return len(self.gates)

    def __iter__(self):
        return iter(self.gates)

    @property
    def cnots(self) -> list[Gate]:
        return [g for g in self.gates if g.is_cnot]

    def count(self, name: str) -> int:
        return sum(1 for g in self.gates if g.name == name)

    def same_gates(self, other: "Circuit") -> bool:
        """Structural equality of the gate lists, ignoring gate origin tags."""
        if self.num_qubits != other.num_qubits or len(self) != len(other):
            return False
        return all(
            (a.name, a.qubits, a.params) == (b.name, b.qubits, b.params)
            for a, b in zip(self.gates, other.gates)
        )


@dataclass(frozen=True)
class Passthrough:
    qubit: int
    anchor: Optional[int]  # core index of the preceding CNOT on ``qubit``
    gate: Gate


@dataclass
class PassthroughPlan:
    """Everything stripped from a source program before routing."""

    passthroughs: list[Passthrough] = field(default_factory=list)
    # (logical qubit, creg name, bit index), in source order
    measures: list[tuple[int, str, int]] = field(default_factory=list)
    cregs: list[tuple[str, int]] = field(default_factory=list)
    # flattening table: (qreg name, size, offset into the flat index space)
    qregs: list[tuple[str, int, int]] = field(default_factory=list)
    dropped_barriers: int = 0

    def __len__(self):
        return len(self.passthroughs)

    def by_anchor(self) -> dict[Optional[int], list[Passthrough]]:
        table: dict[Optional[int], list[Passthrough]] = {}
        for p in self.passthroughs:
            table.setdefault(p.anchor, []).append(p)
        return table

    def flattening(self) -> list[dict]:
        return [{"qreg": n, "size": s, "offset": o} for n, s, o in self.qregs]


def split_core(circuit: Circuit) -> tuple[Circuit, PassthroughPlan]:
    """Strip single-qubit gates off ``circuit``, anchoring each one to the
    preceding CNOT on its qubit."""
    core: list[Gate] = []
    plan = PassthroughPlan()
    last: dict[int, int] = {}
    for g in circuit.gates:
        if g.is_cnot:
            for q in g.qubits:
                last[q] = len(core)
            core.append(g)
        else:
            q = g.qubits[0]
            plan.passthroughs.append(Passthrough(q, last.get(q), g))
    return Circuit(circuit.num_qubits, core, circuit.space), plan


def merge_core(core: Circuit, plan: PassthroughPlan) -> Circuit:
    """Inverse of :func:`split_core`: the gate order on every qubit is
    restored, though gates on different qubits may be interleaved differently."""
    anchored = plan.by_anchor()
    gates = [p.gate for p in anchored.get(None, [])]
    for k, g in enumerate(core.gates):
        gates.append(g)
        gates.extend(p.gate for p in anchored.get(k, []))
    return Circuit(core.num_qubits, gates, core.space)
