"""Dependency graph of a CNOT-only circuit and its layer decomposition."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

from .circuit import Circuit


@dataclass(frozen=True)
class DependencyGraph:
    """Direct-dependency DAG over the gates of a CNOT core.

    Gate ids are positions in the core. ``queues[q]`` lists the gates touching
    logical qubit ``q`` in circuit order and ``slots[g]`` gives the position
    of gate ``g`` in the queues of its control and target. A set of executed
    gates that is closed under dependency is fully described by one cursor
    per qubit into these queues, which is how the router tracks progress.
    """

    num_qubits: int
    controls: tuple[int, ...]
    targets: tuple[int, ...]
    parents: tuple[tuple[int, ...], ...]
    children: tuple[tuple[int, ...], ...]
    queues: tuple[tuple[int, ...], ...]
    slots: tuple[tuple[int, int], ...]

    def __len__(self):
        return len(self.controls)

    def initial_heads(self) -> list[int]:
        return [0] * self.num_qubits

    def heads_for(self, executed: Iterable[int]) -> list[int]:
        """Per-qubit cursors for a dependency-closed executed set."""
        executed = set(executed)
        heads = self.initial_heads()
        for q, queue in enumerate(self.queues):
            h = 0
            while h < len(queue) and queue[h] in executed:
                h += 1
            heads[q] = h
        if sum(heads) != 2 * len(executed):
            raise ValueError("executed set is not closed under dependency")
        return heads

    def front(self, heads: list[int]) -> list[int]:
        """Gates with no unexecuted parent, in increasing id order."""
        out = []
        for q, queue in enumerate(self.queues):
            h = heads[q]
            if h < len(queue):
                g = queue[h]
                # report each gate once, from its control side
                if q == self.controls[g] and heads[self.targets[g]] == self.slots[g][1]:
                    out.append(g)
        out.sort()
        return out

    def is_front(self, g: int, heads: list[int]) -> bool:
        sc, st = self.slots[g]
        return heads[self.controls[g]] == sc and heads[self.targets[g]] == st

    def advance(self, g: int, heads: list[int]) -> None:
        heads[self.controls[g]] += 1
        heads[self.targets[g]] += 1


def build_dependency_graph(core: Circuit) -> DependencyGraph:
    n = core.num_qubits
    controls, targets, parents, slots = [], [], [], []
    queues: list[list[int]] = [[] for _ in range(n)]
    last: list[Optional[int]] = [None] * n
    for g, gate in enumerate(core.gates):
        if not gate.is_cnot:
            raise ValueError(f"gate {g} ({gate!r}) is not a CNOT; strip passthroughs first")
        c, t = gate.qubits
        controls.append(c)
        targets.append(t)
        ps = []
        for q in (c, t):
            if last[q] is not None and last[q] not in ps:
                ps.append(last[q])
            last[q] = g
        parents.append(tuple(sorted(ps)))
        slots.append((len(queues[c]), len(queues[t])))
        queues[c].append(g)
        queues[t].append(g)
    children: list[list[int]] = [[] for _ in controls]
    for g, ps in enumerate(parents):
        for p in ps:
            children[p].append(g)
    return DependencyGraph(
        n, tuple(controls), tuple(targets), tuple(parents),
        tuple(tuple(c) for c in children), tuple(tuple(q) for q in queues), tuple(slots),
    )


@dataclass(frozen=True)
class LayerView:
    layers: tuple[frozenset[int], ...]

    def __len__(self):
        return len(self.layers)

    def __getitem__(self, k):
        return self.layers[k]

    def gates(self) -> set[int]:
        return set().union(*self.layers) if self.layers else set()


def layers_from_heads(dg: DependencyGraph, heads: list[int],
                      depth: Optional[int] = None) -> list[list[int]]:
    h = list(heads)
    out = []
    while depth is None or len(out) <= depth:
        front = dg.front(h)
        if not front:
            break
        out.append(front)
        for g in front:
            dg.advance(g, h)
    return out


def layers(dg: DependencyGraph, executed: Iterable[int] = (),
           depth: Optional[int] = None) -> LayerView:
    """Layers L_0..L_depth of the circuit left after removing ``executed``.

    ``depth=None`` returns every layer.
    """
    found = layers_from_heads(dg, dg.heads_for(executed), depth)
    return LayerView(tuple(frozenset(layer) for layer in found))
