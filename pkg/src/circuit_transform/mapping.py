"""Initial placement of logical qubits by simulated annealing."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .arch import ArchGraph, DistanceTables
from .circuit import Circuit, Gate


class MappingError(ValueError):
    pass


@dataclass(frozen=True)
class Mapping:
    """Injective map from logical qubit ``q`` to physical node ``assign[q]``."""

    assign: tuple[int, ...]
    num_physical: int

    def __post_init__(self):
        object.__setattr__(self, "assign", tuple(int(v) for v in self.assign))
        if len(self.assign) > self.num_physical:
            raise MappingError(f"{len(self.assign)} logical qubits do not fit on "
                               f"{self.num_physical} physical qubits")
        if len(set(self.assign)) != len(self.assign):
            raise MappingError(f"mapping {self.assign} is not injective")
        if any(not 0 <= v < self.num_physical for v in self.assign):
            raise MappingError(f"mapping {self.assign} leaves 0..{self.num_physical - 1}")

    def __getitem__(self, q: int) -> int:
        return self.assign[q]

    def __len__(self):
        return len(self.assign)

    @property
    def occupied(self) -> list[int]:
        """Reverse index: ``occupied[v]`` is the logical qubit on ``v`` or -1."""
        occ = [-1] * self.num_physical
        for q, v in enumerate(self.assign):
            occ[v] = q
        return occ

    @classmethod
    def identity(cls, num_logical: int, num_physical: int) -> "Mapping":
        return cls(tuple(range(num_logical)), num_physical)


@dataclass(frozen=True)
class SAParams:
    t_max: float = 100.0
    t_min: float = 1.0
    delta: float = 0.98
    r: int = 100
    seed: int = 0
    subset_cap: int = 1000

    def __post_init__(self):
        if not self.t_max > self.t_min > 0:
            raise ValueError("need t_max > t_min > 0")
        if not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")
        if self.r < 1:
            raise ValueError("r must be at least 1")
        if self.subset_cap < 1:
            raise ValueError("subset_cap must be at least 1")


def gate_cost(g: Gate, tau: Mapping, tables: DistanceTables) -> int:
    return int(tables.dist_cnot[tau[g.control], tau[g.target]])


def mapping_cost(cstar: Sequence[Gate], tau: Mapping, tables: DistanceTables) -> int:
    if not cstar:
        raise ValueError("empty gate subset")
    return sum(gate_cost(g, tau, tables) for g in cstar)


def select_cstar(lc: Circuit, cap: int) -> list[Gate]:
    """The first ``cap`` CNOTs of ``lc`` in circuit order."""
    if cap < 1:
        raise ValueError("gate subset cap must be positive")
    cnots = lc.cnots
    if not cnots:
        raise ValueError("circuit has no CNOT gates")
    return cnots[:cap]


def _neighbor_move(a: list[int], nv: int, u: Sequence[float]) -> tuple[int, ...]:
    """Mutate ``a`` in place by one random move driven by three uniforms
    from [0, 1); return the moved logical qubits."""
    n = len(a)
    if n == 0:
        return ()
    if n < nv and (n < 2 or u[0] < 0.5):
        taken = set(a)
        free = [v for v in range(nv) if v not in taken]
        q = int(u[1] * n)
        a[q] = free[int(u[2] * len(free))]
        return (q,)
    i = int(u[1] * n)
    j = int(u[2] * (n - 1))
    j += j >= i
    a[i], a[j] = a[j], a[i]
    return (i, j)


def sa_neighbor(tau: Mapping, rng: np.random.Generator) -> Mapping:
    """Random local move: swap two images, or (when free nodes exist) move
    one logical qubit to a free node, each with probability 1/2."""
    a = list(tau.assign)
    _neighbor_move(a, tau.num_physical, rng.random(3).tolist())
    return Mapping(tuple(a), tau.num_physical)


def metropolis_accept(cost: float, ncost: float, temp: float, u: float) -> bool:
    """Always take an improvement; take a worse candidate when the uniform
    draw ``u`` falls below exp((cost - ncost) / temp)."""
    if ncost < cost:
        return True
    return u < math.exp((cost - ncost) / temp)


class _Evaluator:
    """Summed CNOT distance over a fixed gate multiset, with cheap deltas
    for moves that touch only a few logical qubits."""

    def __init__(self, cstar: Sequence[Gate], tables: DistanceTables, num_logical: int):
        pairs: dict[tuple[int, int], int] = {}
        for g in cstar:
            pairs[(g.control, g.target)] = pairs.get((g.control, g.target), 0) + 1
        self.pairs = [(c, t, w) for (c, t), w in sorted(pairs.items())]
        self.touching: list[list[int]] = [[] for _ in range(num_logical)]
        for k, (c, t, _) in enumerate(self.pairs):
            self.touching[c].append(k)
            self.touching[t].append(k)
        self.rows = tables.cnot_rows

    def __call__(self, assign: Sequence[int]) -> int:
        d = self.rows
        return sum(w * d[assign[c]][assign[t]] for c, t, w in self.pairs)

    def delta(self, old: Sequence[int], new: Sequence[int], moved: Sequence[int]) -> int:
        ks = set()
        for q in moved:
            ks.update(self.touching[q])
        d, pairs = self.rows, self.pairs
        total = 0
        for k in ks:
            c, t, w = pairs[k]
            total += w * (d[new[c]][new[t]] - d[old[c]][old[t]])
        return total


@dataclass
class SATrace:
    """Per-iteration accepted-state cost and best-so-far cost."""

    accepted: list[int] = field(default_factory=list)
    best: list[int] = field(default_factory=list)
    epoch_starts: list[int] = field(default_factory=list)

    def rows(self):
        return zip(range(len(self.accepted)), self.accepted, self.best)

    def to_csv(self) -> str:
        lines = ["iteration,accepted_cost,best_cost"]
        lines += [f"{i},{a},{b}" for i, a, b in self.rows()]
        return "\n".join(lines) + "\n"


def sa_initial_mapping(
    cstar: Sequence[Gate],
    ag: ArchGraph,
    params: SAParams = SAParams(),
    num_logical: Optional[int] = None,
    start: Optional[Mapping] = None,
) -> tuple[Mapping, int, SATrace]:
    """Anneal a mapping that minimizes the summed CNOT distance of ``cstar``.

    Starts from ``start`` (identity prefix by default). Returns the best
    mapping seen, its cost and the cost traces.
    """
    if num_logical is None:
        num_logical = 1 + max(q for g in cstar for q in g.qubits)
    if num_logical > ag.num_nodes:
        raise MappingError(f"{num_logical} logical qubits exceed {ag.num_nodes} physical")
    tau = start if start is not None else Mapping.identity(num_logical, ag.num_nodes)
    cost_of = _Evaluator(cstar, ag.tables, num_logical)
    rng = np.random.default_rng(params.seed)
    nv = ag.num_nodes
    cur = list(tau.assign)
    cost = bcost = cost_of(cur)
    best = tuple(cur)
    trace = SATrace()
    temp = params.t_max
    while temp >= params.t_min:
        trace.epoch_starts.append(len(trace.accepted))
        draws = rng.random((params.r, 4)).tolist()
        for u in draws:
            cand = list(cur)
            moved = _neighbor_move(cand, nv, u)
            ncost = cost + cost_of.delta(cur, cand, moved)
            if ncost < bcost:
                bcost, best = ncost, tuple(cand)
            if metropolis_accept(cost, ncost, temp, u[3]):
                cost, cur = ncost, cand
            trace.accepted.append(cost)
            trace.best.append(bcost)
        temp *= params.delta
    best = Mapping(best, nv)
    return best, bcost, trace


def anneal(
    lc: Circuit,
    ag: ArchGraph,
    params: SAParams = SAParams(),
    restarts: int = 1,
) -> tuple[Mapping, int, SATrace]:
    """Run up to ``restarts`` independent anneals on C* and keep the best.

    Attempt ``i`` uses seed ``params.seed + i``; stops early once a zero-cost
    mapping is found, since nothing can beat it.
    """
    if lc.num_qubits > ag.num_nodes:
        raise MappingError(f"{lc.num_qubits} logical qubits exceed {ag.num_nodes} physical")
    if not lc.cnots:
        return Mapping.identity(lc.num_qubits, ag.num_nodes), 0, SATrace()
    cstar = select_cstar(lc, params.subset_cap)
    best = None
    for i in range(max(1, restarts)):
        attempt = SAParams(params.t_max, params.t_min, params.delta, params.r,
                           params.seed + i, params.subset_cap)
        result = sa_initial_mapping(cstar, ag, attempt, num_logical=lc.num_qubits)
        if best is None or result[1] < best[1]:
            best = result
        if best[1] == 0:
            break
    return best
