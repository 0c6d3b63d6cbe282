"""SWAP-insertion search with a layered look-ahead cost and grandchild selection.

The search keeps one committed state. At every step it expands the children
of that state (a SWAP on an edge next to the front layer, or a direction
reversal of a front gate on a one-way edge), scores each child by the best
cost among *its* children, and moves to the winner. A stagnation counter
triggers a remote-CNOT fallback that executes one front gate without
touching the mapping, which bounds the number of steps.
"""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

from .arch import ArchGraph, DistanceTables
from .circuit import INSERTED, SOURCE, Circuit, Execution, Gate, PassthroughPlan, cnot, hadamard
from .dag import DependencyGraph, build_dependency_graph, layers_from_heads
from .mapping import Mapping


class RoutingError(RuntimeError):
    pass


@dataclass(frozen=True)
class CostParams:
    """Weights of the heuristic cost.

    ``layer_weights[k]`` multiplies the summed CNOT distance of layer ``k``
    (``k = 0`` is the front layer); ``tail_weight`` scales the per-gate
    estimate ``(diameter - 1) * n_swap`` charged for every remaining gate.
    ``fallback_threshold=None`` means ``ceil(diameter / 2)``.
    """

    lookahead_layers: int = 3
    layer_weights: tuple[float, ...] = (1.0, 1.0, 0.8, 0.6)
    tail_weight: float = 0.4
    fallback_threshold: Optional[int] = None
    lookahead_depth: int = 1
    prune: bool = True

    def __post_init__(self):
        w = tuple(float(x) for x in self.layer_weights)
        object.__setattr__(self, "layer_weights", w)
        if self.lookahead_layers < 0:
            raise ValueError("lookahead_layers must be non-negative")
        if len(w) != self.lookahead_layers + 1:
            raise ValueError(f"need {self.lookahead_layers + 1} layer weights, got {len(w)}")
        chain = w + (float(self.tail_weight),)
        if w[0] != 1.0 or any(a < b for a, b in zip(chain, chain[1:])) or chain[-1] < 0:
            raise ValueError(f"weights must satisfy 1 = w0 >= ... >= w_s >= 0, got {chain}")
        if self.fallback_threshold is not None and self.fallback_threshold < 1:
            raise ValueError("fallback threshold must be >= 1")
        if self.lookahead_depth < 0:
            raise ValueError("lookahead_depth must be >= 0")

    def threshold(self, tables: DistanceTables) -> int:
        if self.fallback_threshold is not None:
            return self.fallback_threshold
        return max(1, math.ceil(0.5 * tables.diameter))


@dataclass
class RouteReport:
    original_size: int = 0
    output_size: int = 0
    added_gates: int = 0
    swap_count: int = 0
    reversal_count: int = 0
    fallback_count: int = 0
    pruned_children: int = 0
    states_expanded: int = 0
    wall_time: float = 0.0
    final_sigma: list[int] = field(default_factory=list)
    tau_ini: list[int] = field(default_factory=list)
    # gate-accounting detail
    swap_gates: int = 0
    reversal_gates: int = 0
    remote_gates: int = 0
    source_cnots: int = 0
    fallback_threshold: int = 0
    max_children: int = 0
    max_live_states: int = 0
    grandchildren_evaluated: int = 0

    def to_dict(self, timing: bool = True) -> dict:
        d = asdict(self)
        if not timing:
            del d["wall_time"]
        return d


# --- gate blocks -------------------------------------------------------------

def swap_block(ag: ArchGraph, edge: tuple[int, int]) -> list[Gate]:
    """SWAP of nodes ``edge`` built from CNOTs that respect ``ag``."""
    u, v = edge
    fwd, back = (u, v) in ag.edges, (v, u) in ag.edges
    if not (fwd or back):
        raise RoutingError(f"no edge between {u} and {v}")
    if fwd and back:
        return [cnot(u, v, INSERTED), cnot(v, u, INSERTED), cnot(u, v, INSERTED)]
    a, b = (u, v) if fwd else (v, u)
    return [cnot(a, b, INSERTED),
            hadamard(a, INSERTED), hadamard(b, INSERTED),
            cnot(a, b, INSERTED),
            hadamard(a, INSERTED), hadamard(b, INSERTED),
            cnot(a, b, INSERTED)]


def reverse_block(edge: tuple[int, int], ag: Optional[ArchGraph] = None,
                  origin: str = INSERTED) -> list[Gate]:
    """CNOT(u, v) realized on the one-way edge (v, u) with four Hadamards.

    ``origin`` tags the middle CNOT, which carries the source gate.
    """
    u, v = edge
    if ag is not None and ((v, u) not in ag.edges or (u, v) in ag.edges):
        raise RoutingError(f"({v},{u}) is not a one-way edge")
    return [hadamard(u, INSERTED), hadamard(v, INSERTED), cnot(v, u, origin),
            hadamard(u, INSERTED), hadamard(v, INSERTED)]


def _oriented(ag: ArchGraph, a: int, b: int, origin: str) -> list[Gate]:
    if (a, b) in ag.edges:
        return [cnot(a, b, origin)]
    if (b, a) in ag.edges:
        return reverse_block((a, b), origin=origin)
    raise RoutingError(f"nodes {a} and {b} are not adjacent")


def remote_cnot_block(path: Sequence[int], ag: ArchGraph) -> list[Gate]:
    """CNOT(path[0], path[-1]) through a chain of neighbours, leaving every
    interior wire as it was. Uses 4(d-1) CNOTs for d = len(path) - 1 >= 2."""
    path = list(path)
    d = len(path) - 1
    if d < 1:
        raise RoutingError("remote CNOT needs a path of at least one edge")
    for a, b in zip(path, path[1:]):
        if not ag.has_pair(a, b):
            raise RoutingError(f"path nodes {a} and {b} are not adjacent")
    if d == 1:
        return _oriented(ag, path[0], path[1], SOURCE)
    ladder = (list(range(d)) + list(range(d - 2, -1, -1))
              + list(range(1, d)) + list(range(d - 2, 0, -1)))
    out: list[Gate] = []
    for k in ladder:
        out += _oriented(ag, path[k], path[k + 1], INSERTED)
    return out


def shortest_path_lex(ag: ArchGraph, src: int, dst: int) -> list[int]:
    """Lexicographically smallest undirected shortest path."""
    du = ag.tables.dist_u
    path = [src]
    while path[-1] != dst:
        cur = path[-1]
        path.append(next(n for n in ag.neighbors[cur] if du[n, dst] == du[cur, dst] - 1))
    return path


# --- search state ------------------------------------------------------------

@dataclass(eq=False)
class SearchState:
    """One node of the search.

    The physical circuit is ``base[:base_len] + ops``: ``base`` is shared,
    append-only storage owned by the committed line of states, ``ops`` holds
    what this state added. Cost-only states have ``ops = None``.
    """

    dg: DependencyGraph
    tau: list[int]
    occ: list[int]
    wires: list[int]  # wires[w] = initial wire whose content now sits on w
    heads: list[int]
    remaining: int
    stagnation: int = 0
    gcost: int = 0
    ops: Optional[list[Gate]] = field(default_factory=list)
    execs: list[Execution] = field(default_factory=list)
    executed: int = 0
    op: tuple = ()
    base: list[Gate] = field(default_factory=list)
    base_len: int = 0
    base_execs: list[Execution] = field(default_factory=list)
    base_execs_len: int = 0
    _cache: Optional[tuple] = None

    @classmethod
    def initial(cls, dg: DependencyGraph, tau_ini: Mapping) -> "SearchState":
        wires = list(range(tau_ini.num_physical))
        return cls(dg, list(tau_ini.assign), tau_ini.occupied, wires,
                   dg.initial_heads(), len(dg))

    @property
    def mapping(self) -> Mapping:
        return Mapping(tuple(self.tau), len(self.occ))

    @property
    def pc(self) -> list[Gate]:
        return self.base[:self.base_len] + list(self.ops or [])

    @property
    def executions(self) -> list[Execution]:
        return self.base_execs[:self.base_execs_len] + self.execs

    @property
    def sigma(self) -> list[int]:
        """sigma[w] = current wire of the content that started on w."""
        s = [0] * len(self.wires)
        for w, orig in enumerate(self.wires):
            s[orig] = w
        return s

    def executed_set(self) -> set[int]:
        out = set()
        for q, queue in enumerate(self.dg.queues):
            out.update(queue[:self.heads[q]])
        return out

    def spawn(self, cost_only: bool = False) -> "SearchState":
        """A child shell anchored at this state: gcost and ops start empty."""
        base, blen = self.base, self.base_len
        bex, bexlen = self.base_execs, self.base_execs_len
        if self.ops and not cost_only:
            # rare: a child of an uncommitted state needs its own prefix
            base, blen = base[:blen] + self.ops, blen + len(self.ops)
            bex = bex[:bexlen] + self.execs
            bexlen = len(bex)
        return SearchState(
            self.dg, list(self.tau), list(self.occ), list(self.wires), list(self.heads),
            self.remaining, self.stagnation, 0, None if cost_only else [], [], 0, (),
            base, blen, bex, bexlen,
        )

    def emit(self, gates: list[Gate]) -> None:
        if self.ops is not None:
            self.ops.extend(gates)

    def record(self, g: int) -> None:
        if self.ops is None:
            return
        c, t = self.dg.controls[g], self.dg.targets[g]
        self.execs.append(Execution(g, self.base_len + len(self.ops), c, t,
                                    self.tau[c], self.tau[t]))

    def apply_swap(self, u: int, v: int) -> None:
        qa, qb = self.occ[u], self.occ[v]
        self.occ[u], self.occ[v] = qb, qa
        if qa >= 0:
            self.tau[qa] = v
        if qb >= 0:
            self.tau[qb] = u
        self.wires[u], self.wires[v] = self.wires[v], self.wires[u]
        self._cache = None

    def retire(self, g: int) -> None:
        self.dg.advance(g, self.heads)
        self.remaining -= 1
        self.executed += 1
        self._cache = None


def _execute(state: SearchState, ag: ArchGraph, seeds: Optional[Sequence[int]] = None) -> int:
    """Run every gate that becomes executable under the current mapping,
    looking only at gates reachable from ``seeds`` (all qubits if None)."""
    dg, heads, tau, is_edge = state.dg, state.heads, state.tau, ag.is_edge
    queues, controls, targets, slots = dg.queues, dg.controls, dg.targets, dg.slots
    work = list(range(dg.num_qubits - 1, -1, -1)) if seeds is None else sorted(set(seeds), reverse=True)
    done = 0
    while work:
        q = work.pop()
        h = heads[q]
        if h >= len(queues[q]):
            continue
        g = queues[q][h]
        c, t = controls[g], targets[g]
        if heads[c] != slots[g][0] or heads[t] != slots[g][1]:
            continue
        if not is_edge[tau[c]][tau[t]]:
            continue
        state.emit([cnot(tau[c], tau[t])])
        state.record(g)
        state.retire(g)
        done += 1
        work.extend((t, c) if c < t else (c, t))
    return done


def execute_all(state: SearchState, ag: ArchGraph) -> SearchState:
    """Copy of ``state`` advanced to the fixed point of gate execution."""
    out = state.spawn()
    out.gcost, out.stagnation = state.gcost, state.stagnation
    before = out.remaining
    _execute(out, ag)
    if out.remaining < before:
        out.stagnation = 0
    return out


def _front_images(state: SearchState, front: list[int]) -> set[int]:
    dg, tau = state.dg, state.tau
    nodes = set()
    for g in front:
        nodes.add(tau[dg.controls[g]])
        nodes.add(tau[dg.targets[g]])
    return nodes


def _candidate_pairs(state: SearchState, ag: ArchGraph, front: list[int]) -> list[tuple[int, int]]:
    nodes = _front_images(state, front)
    return [p for p in ag.pairs if p[0] in nodes or p[1] in nodes]


def _reversible(state: SearchState, ag: ArchGraph, front: list[int]) -> list[int]:
    dg, tau, is_edge = state.dg, state.tau, ag.is_edge
    return [g for g in front
            if is_edge[tau[dg.targets[g]]][tau[dg.controls[g]]]
            and not is_edge[tau[dg.controls[g]]][tau[dg.targets[g]]]]


def _swap_child(state: SearchState, ag: ArchGraph, pair: tuple[int, int],
                cost_only: bool = False) -> SearchState:
    u, v = pair
    kid = state.spawn(cost_only)
    kid.apply_swap(u, v)
    kid.emit(swap_block(ag, pair))
    kid.gcost = 3 if ag.is_edge[u][v] and ag.is_edge[v][u] else 7
    kid.op = ("swap", u, v)
    _execute(kid, ag, [q for q in (kid.occ[u], kid.occ[v]) if q >= 0])
    kid.stagnation = 0 if kid.executed else state.stagnation + 1
    return kid


def _reversal_child(state: SearchState, ag: ArchGraph, g: int,
                    cost_only: bool = False) -> SearchState:
    kid = state.spawn(cost_only)
    c, t = state.dg.controls[g], state.dg.targets[g]
    kid.emit(reverse_block((kid.tau[c], kid.tau[t]), origin=SOURCE))
    kid.record(g)
    kid.retire(g)
    kid.gcost = 4
    kid.op = ("reverse", g)
    _execute(kid, ag, (c, t))
    kid.stagnation = 0
    return kid


def children(state: SearchState, ag: ArchGraph, cost_only: bool = False) -> list[SearchState]:
    """All children: one per SWAP-able pair next to the front layer, then one
    per front gate that only needs a direction reversal."""
    front = state.dg.front(state.heads)
    kids = [_swap_child(state, ag, p, cost_only) for p in _candidate_pairs(state, ag, front)]
    kids += [_reversal_child(state, ag, g, cost_only) for g in _reversible(state, ag, front)]
    return kids


# --- cost --------------------------------------------------------------------

def tail_cost(state: SearchState, tables: DistanceTables, params: CostParams) -> float:
    return params.tail_weight * (tables.diameter - 1) * tables.n_swap * state.remaining


def _window(state: SearchState, tables: DistanceTables, params: CostParams):
    """(layered cost, [(control, target, weight)], front gates) for the first
    lookahead_layers + 1 layers; cached on the state."""
    if state._cache is None:
        dg, tau, dist = state.dg, state.tau, tables.cnot_rows
        found = layers_from_heads(dg, state.heads, params.lookahead_layers)
        entries, total = [], 0.0
        for w, layer in zip(params.layer_weights, found):
            sub = 0
            for g in layer:
                c, t = dg.controls[g], dg.targets[g]
                entries.append((c, t, w))
                sub += dist[tau[c]][tau[t]]
            total += w * sub
        state._cache = (total, entries, found[0] if found else [])
    return state._cache


def layered_cost(state: SearchState, tables: DistanceTables, params: CostParams) -> float:
    return _window(state, tables, params)[0]


def cost_h(state: SearchState, tables: DistanceTables, params: CostParams) -> float:
    if state.remaining == 0:
        return 0.0
    return layered_cost(state, tables, params) + tail_cost(state, tables, params)


def min_child_hcost(state: SearchState, ag: ArchGraph, tables: DistanceTables,
                    params: CostParams, stats: Optional[RouteReport] = None) -> float:
    """min over children c of ``gcost(c) + cost_h(c)``, without building
    physical gate lists.

    A SWAP child that executes nothing keeps the remaining circuit, so its
    cost is the parent's layered cost corrected only for the gates touching
    the two moved qubits.
    """
    if state.remaining == 0:
        return 0.0
    dg, tau, occ, is_edge = state.dg, state.tau, state.occ, ag.is_edge
    dist = tables.cnot_rows
    layered, entries, front = _window(state, tables, params)
    tail = tail_cost(state, tables, params)
    by_qubit: dict[int, list[int]] = {}
    for i, (c, t, _) in enumerate(entries):
        by_qubit.setdefault(c, []).append(i)
        by_qubit.setdefault(t, []).append(i)
    front_of = {}
    for g in front:
        front_of[dg.controls[g]] = g
        front_of[dg.targets[g]] = g

    best = math.inf
    evaluated = 0
    for u, v in _candidate_pairs(state, ag, front):
        evaluated += 1
        gc = 3 if is_edge[u][v] and is_edge[v][u] else 7
        qa, qb = occ[u], occ[v]
        moved = {qa: v, qb: u}
        moved.pop(-1, None)

        def pos(q):
            return moved.get(q, tau[q])

        fires = False
        for q in moved:
            g = front_of.get(q)
            if g is not None and is_edge[pos(dg.controls[g])][pos(dg.targets[g])]:
                fires = True
                break
        if fires:
            kid = _swap_child(state, ag, (u, v), cost_only=True)
            h = cost_h(kid, tables, params)
        else:
            touched = set()
            for q in moved:
                touched.update(by_qubit.get(q, ()))
            delta = 0.0
            for i in touched:
                c, t, w = entries[i]
                delta += w * (dist[pos(c)][pos(t)] - dist[tau[c]][tau[t]])
            h = layered + delta + tail
        best = min(best, gc + h)
    for g in _reversible(state, ag, front):
        evaluated += 1
        kid = _reversal_child(state, ag, g, cost_only=True)
        best = min(best, 4 + cost_h(kid, tables, params))
    if stats is not None:
        stats.grandchildren_evaluated += evaluated
    return best


def lookahead_value(state: SearchState, ag: ArchGraph, tables: DistanceTables,
                    params: CostParams, depth: int, stats: Optional[RouteReport] = None,
                    held: int = 0) -> float:
    """Best reachable ``accumulated gcost + cost_h`` exactly ``depth`` levels
    below ``state`` (depth 0 is ``cost_h`` itself).

    ``held`` is the number of states the caller keeps alive; it only feeds
    the live-state high-water mark in ``stats``.
    """
    if state.remaining == 0 or depth == 0:
        return cost_h(state, tables, params)
    if depth == 1:
        return min_child_hcost(state, ag, tables, params, stats)
    kids = children(state, ag, cost_only=True)
    if stats is not None:
        # plus one transient state inside min_child_hcost
        stats.max_live_states = max(stats.max_live_states, held + len(kids) + 1)
    return min(k.gcost + lookahead_value(k, ag, tables, params, depth - 1, stats, held + len(kids))
               for k in kids)


def prune_children(parent: SearchState, kids: list[SearchState], tables: DistanceTables,
                   params: CostParams) -> list[SearchState]:
    """Drop children that executed nothing and made the layered cost worse.

    If that would drop every child, the one with the lowest
    ``gcost + cost_h`` survives.
    """
    if not kids:
        raise ValueError("nothing to prune")
    p_tail = tail_cost(parent, tables, params)
    p_layer = layered_cost(parent, tables, params)
    kept = [k for k in kids
            if not (tail_cost(k, tables, params) >= p_tail
                    and layered_cost(k, tables, params) > p_layer + 1e-9)]
    if kept:
        return kept
    return [min(kids, key=lambda k: (k.gcost + cost_h(k, tables, params), k.op))]


# --- fallback ----------------------------------------------------------------

def fallback(state: SearchState, ag: ArchGraph, tables: DistanceTables) -> SearchState:
    """Execute the cheapest front gate through a remote CNOT; the mapping is
    left untouched."""
    dg, tau = state.dg, state.tau
    front = dg.front(state.heads)
    if not front:
        raise RoutingError("fallback on an exhausted circuit")
    dist = tables.cnot_rows
    g = min(front, key=lambda g: (dist[tau[dg.controls[g]]][tau[dg.targets[g]]], dg.controls[g], g))
    c, t = dg.controls[g], dg.targets[g]
    kid = state.spawn()
    block = remote_cnot_block(shortest_path_lex(ag, tau[c], tau[t]), ag)
    kid.emit(block)
    kid.record(g)
    kid.retire(g)
    kid.gcost = len(block) - 1
    kid.op = ("fallback", g)
    _execute(kid, ag, (c, t))
    kid.stagnation = 0
    return kid


# --- driver ------------------------------------------------------------------

def _selection_key(kid: SearchState, score: float):
    return (round(score, 9), kid.remaining, kid.op)


def route(
    lc: Circuit,
    ag: ArchGraph,
    tau_ini: Mapping,
    params: CostParams = CostParams(),
    plan: Optional[PassthroughPlan] = None,
    self_check: bool = False,
    step_limit: Optional[int] = None,
) -> tuple[Circuit, RouteReport]:
    """Transform the CNOT core ``lc`` into a circuit that respects ``ag``.

    ``step_limit`` caps the number of search steps and raises
    :class:`RoutingError` when exceeded; it exists to observe searches that
    would not terminate without the fallback.
    """
    t0 = time.perf_counter()
    if lc.num_qubits > ag.num_nodes:
        raise RoutingError(f"{lc.num_qubits} logical qubits exceed {ag.num_nodes} physical")
    if len(tau_ini) != lc.num_qubits or tau_ini.num_physical != ag.num_nodes:
        raise RoutingError("initial mapping does not match circuit and architecture")
    tables = ag.tables
    dg = build_dependency_graph(lc)
    report = RouteReport(tau_ini=list(tau_ini.assign), source_cnots=len(dg))
    limit = params.threshold(tables)
    report.fallback_threshold = limit

    state = SearchState.initial(dg, tau_ini)
    _execute(state, ag)

    def commit(s: SearchState) -> SearchState:
        # fold the winner's gates into shared storage so the next
        # generation of children starts from an empty delta
        del s.base[s.base_len:]
        s.base.extend(s.ops)
        s.base_len = len(s.base)
        del s.base_execs[s.base_execs_len:]
        s.base_execs.extend(s.execs)
        s.base_execs_len = len(s.base_execs)
        s.ops, s.execs, s.executed, s.gcost = [], [], 0, 0
        return s

    state = commit(state)
    while state.remaining:
        if state.stagnation >= limit:
            nxt = fallback(state, ag, tables)
            report.fallback_count += 1
            report.remote_gates += nxt.gcost
            state = commit(nxt)
            continue
        if step_limit is not None and report.states_expanded >= step_limit:
            raise RoutingError(f"no progress within {step_limit} search steps")
        kids = children(state, ag)
        report.states_expanded += 1
        report.max_children = max(report.max_children, len(kids))
        report.max_live_states = max(report.max_live_states, len(kids) + 1)
        if params.prune:
            survivors = prune_children(state, kids, tables, params)
            report.pruned_children += len(kids) - len(survivors)
            kids = survivors
        scored = []
        for kid in kids:
            score = kid.gcost + lookahead_value(kid, ag, tables, params,
                                                params.lookahead_depth, report, len(kids) + 1)
            scored.append((_selection_key(kid, score), kid))
        best = min(scored, key=lambda item: item[0])[1]
        if best.op[0] == "swap":
            report.swap_count += 1
            report.swap_gates += best.gcost
        else:
            report.reversal_count += 1
            report.reversal_gates += 4
        state = commit(best)

    gates = state.base[:state.base_len]
    for gate in gates:
        if gate.is_cnot and not ag.is_edge[gate.control][gate.target]:
            raise RoutingError(f"emitted {gate!r} off the architecture")
    pc = Circuit(ag.num_nodes, gates, "physical", state.base_execs[:state.base_execs_len])
    sigma = state.sigma
    if [sigma[v] for v in tau_ini.assign] != state.tau:
        raise RoutingError("wire tracking diverged from the mapping")
    extra = len(plan) if plan is not None else 0
    report.original_size = len(lc) + extra
    report.output_size = len(pc) + extra
    report.added_gates = report.output_size - report.original_size
    report.final_sigma = sigma
    if self_check:
        from .verify import VerificationError, check_equivalence

        if not check_equivalence(lc, pc, tau_ini, sigma):
            raise VerificationError("output is not equivalent to the input")
    report.wall_time = time.perf_counter() - t0
    return pc, report
