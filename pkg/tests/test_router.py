import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from circuit_transform.arch import ArchGraph, line, load_arch
from circuit_transform.circuit import Circuit, cnot
from circuit_transform.dag import build_dependency_graph
from circuit_transform.generators import fixture_text, random_cnot_circuit
from circuit_transform.mapping import Mapping
from circuit_transform.qasm import parse_qasm
from circuit_transform.router import (
    CostParams, RoutingError, SearchState, children, cost_h, execute_all, fallback,
    layered_cost, min_child_hcost, prune_children, route, tail_cost,
)
from circuit_transform.verify import check_equivalence, gf2_of
from oracles import naive_cost_h

# The worked example's test device: six nodes around which the first
# search step happens, plus a two-node tail that stretches the diameter to 5.
# Only the edges touching nodes 0..5 are exercised by the example.
TEST_DEVICE = ArchGraph(8, [(1, 0), (1, 2), (2, 3), (3, 4), (5, 0), (5, 2), (4, 5),
                            (4, 6), (6, 7)], "test-device")
ALU_CORE = [(3, 4), (2, 1), (1, 3), (2, 1), (3, 2), (3, 1), (2, 1), (3, 2), (1, 3),
            (2, 0), (0, 4), (2, 0), (4, 2), (4, 0), (2, 0), (4, 2), (0, 4)]

# Without a fallback the look-ahead search cycles forever on this instance.
OSCILLATING = [(0, 5), (3, 4), (4, 1), (6, 0), (1, 3), (3, 2), (0, 1), (0, 1)]


def start(lc, ag, tau=None):
    tau = tau or Mapping.identity(lc.num_qubits, ag.num_nodes)
    return execute_all(SearchState.initial(build_dependency_graph(lc), tau), ag)


def alu_state():
    lc, _ = parse_qasm(fixture_text("alu-v0_27"))
    assert [g.qubits for g in lc.gates] == ALU_CORE
    return lc, start(lc, TEST_DEVICE)


def random_states(rng, count, archs=("qx5", "q20", "line-8", "grid-3x3")):
    """States reached by short random walks through the search tree."""
    out = []
    while len(out) < count:
        ag = load_arch(archs[int(rng.integers(len(archs)))])
        n = int(rng.integers(2, 9))
        lc = random_cnot_circuit(n, int(rng.integers(1, 30)), rng)
        tau = Mapping(tuple(int(v) for v in rng.permutation(ag.num_nodes)[:n]), ag.num_nodes)
        s = start(lc, ag, tau)
        for _ in range(int(rng.integers(0, 4))):
            if not s.remaining:
                break
            kids = children(s, ag)
            s = kids[int(rng.integers(len(kids)))]
        if s.remaining:
            out.append((s, ag, lc))
    return out


def naive_cost(state, ag, params):
    executed = state.executed_set()
    rem = [(g, (state.dg.controls[g], state.dg.targets[g]))
           for g in range(len(state.dg)) if g not in executed]
    t = ag.tables
    return naive_cost_h(rem, state.tau, t.dist_cnot.tolist(), params.layer_weights,
                        params.tail_weight, t.diameter, t.n_swap)


def test_cost_params_validation():
    CostParams()
    with pytest.raises(ValueError):
        CostParams(layer_weights=(1, 1, 0.8))
    with pytest.raises(ValueError):
        CostParams(layer_weights=(1, 1.2, 0.8, 0.6))
    with pytest.raises(ValueError):
        CostParams(tail_weight=0.7)
    with pytest.raises(ValueError):
        CostParams(fallback_threshold=0)
    assert CostParams().threshold(load_arch("qx5").tables) == 4
    assert CostParams().threshold(line(2).tables) == 1


def test_initial_execution_of_worked_example():
    _, s = alu_state()
    assert [g.qubits for g in s.pc] == [(3, 4)]
    assert s.remaining == 16
    assert TEST_DEVICE.tables.diameter == 5


def test_worked_example_children():
    _, s = alu_state()
    p = CostParams()
    kids = children(s, TEST_DEVICE)
    got = [(k.op, k.gcost, round(cost_h(k, TEST_DEVICE.tables, p), 1)) for k in kids]
    assert got == [
        (("swap", 0, 1), 7, 208.2),
        (("swap", 1, 2), 7, 167.2),
        (("swap", 2, 3), 7, 199.0),
        (("swap", 2, 5), 7, 203.0),
        (("reverse", 1), 4, 188.8),
    ]
    assert kids[0].tau == [1, 0, 2, 3, 4]
    assert kids[3].tau == [0, 1, 5, 3, 4]
    assert kids[4].tau == [0, 1, 2, 3, 4]
    # swapping 1 and 2 unlocks three gates at once
    assert kids[1].executed == 3


def test_worked_example_grandchildren():
    _, s = alu_state()
    p, t = CostParams(), TEST_DEVICE.tables
    want = {
        ("swap", 0, 1): [195.8, 195.8, 199.2, 211.4, 196.0],
        ("swap", 1, 2): [177.6, 166.2, 157.6, 175.0],
        ("swap", 2, 3): [211.4, 194.6, 195.8, 208.6],
        ("swap", 2, 5): [196.0, 201.8, 160.8, 195.8, 211.4],
        ("reverse", 1): [200.6, 167.2, 177.6, 200.0],
    }
    for kid in children(s, TEST_DEVICE):
        grand = children(kid, TEST_DEVICE)
        costs = [round(cost_h(g, t, p), 1) for g in grand]
        assert sorted(costs) == sorted(want[kid.op])
        assert {g.gcost + kid.gcost for g in grand} <= {14, 11}
        best = min(g.gcost + cost_h(g, t, p) for g in grand)
        assert min_child_hcost(kid, TEST_DEVICE, t, p) == pytest.approx(best)


def test_worked_example_selects_the_first_swap():
    lc, s = alu_state()
    p, t = CostParams(), TEST_DEVICE.tables
    scores = {k.op: k.gcost + min_child_hcost(k, TEST_DEVICE, t, p)
              for k in children(s, TEST_DEVICE)}
    assert min(scores, key=scores.get) == ("swap", 1, 2)
    assert scores[("swap", 1, 2)] == pytest.approx(14 + 157.6)
    pc, _ = route(lc, TEST_DEVICE, Mapping.identity(5, 8))
    # after the initially executable gate comes the 7-gate swap of nodes 1, 2
    assert [(g.name, g.qubits) for g in pc.gates[1:8]] == [
        ("cx", (1, 2)), ("h", (1,)), ("h", (2,)), ("cx", (1, 2)),
        ("h", (1,)), ("h", (2,)), ("cx", (1, 2)),
    ]


def test_execute_all_fixed_point():
    ag = line(4)
    lc = Circuit(4, [cnot(0, 3)])
    s = start(lc, ag)
    again = execute_all(s, ag)
    assert again.remaining == s.remaining == 1 and not again.pc


def test_execute_all_follows_chains():
    ag = line(3)
    # the second gate only becomes a front gate after the first runs
    s = start(Circuit(3, [cnot(0, 1), cnot(1, 2)]), ag)
    assert s.remaining == 0
    assert [g.qubits for g in s.pc] == [(0, 1), (1, 2)]


def test_no_reversal_children_on_two_way_graphs():
    rng = np.random.default_rng(1)
    for s, ag, _ in random_states(rng, 30, ("q20", "line-8", "grid-3x3")):
        assert all(k.op[0] == "swap" and k.gcost == 3 for k in children(s, ag))


def test_child_count_bound():
    rng = np.random.default_rng(2)
    for s, ag, lc in random_states(rng, 60):
        assert len(children(s, ag)) <= len(ag.edges) + lc.num_qubits / 2


def test_cost_of_empty_circuit():
    s = start(Circuit(2, [cnot(0, 1)]), line(2))
    assert s.remaining == 0
    assert cost_h(s, line(2).tables, CostParams()) == 0


def test_cost_of_one_satisfied_gate_is_tail_only():
    ag = load_arch("q20")
    lc = Circuit(2, [cnot(0, 1)])
    s = SearchState.initial(build_dependency_graph(lc), Mapping((0, 1), 20))
    d = ag.tables.diameter
    assert cost_h(s, ag.tables, CostParams()) == pytest.approx(0.4 * (d - 1) * 3)


def test_cost_matches_naive_evaluation():
    rng = np.random.default_rng(3)
    p = CostParams()
    for s, ag, _ in random_states(rng, 200):
        assert cost_h(s, ag.tables, p) == pytest.approx(naive_cost(s, ag, p))


def test_min_child_cost_matches_full_expansion():
    rng = np.random.default_rng(4)
    p = CostParams()
    for s, ag, _ in random_states(rng, 100):
        t = ag.tables
        want = min(k.gcost + cost_h(k, t, p) for k in children(s, ag))
        assert min_child_hcost(s, ag, t, p) == pytest.approx(want)


def test_pruning_keeps_productive_children():
    rng = np.random.default_rng(5)
    p = CostParams()
    for s, ag, _ in random_states(rng, 60):
        kids = children(s, ag)
        kept = prune_children(s, kids, ag.tables, p)
        assert kept
        for k in kids:
            if k.executed:
                assert k in kept


def test_pruning_drops_a_swap_that_moves_apart():
    ag = line(4)
    lc = Circuit(4, [cnot(1, 2)])
    s = SearchState.initial(build_dependency_graph(lc), Mapping((0, 1, 3, 2), 4))
    kids = children(s, ag)
    t, p = ag.tables, CostParams()
    apart = next(k for k in kids if k.op == ("swap", 0, 1))
    assert not apart.executed
    assert layered_cost(apart, t, p) > layered_cost(s, t, p)
    assert tail_cost(apart, t, p) == tail_cost(s, t, p)
    assert apart not in prune_children(s, kids, t, p)


def test_pruning_never_empties():
    ag = line(4)
    lc = Circuit(4, [cnot(1, 2)])
    s = SearchState.initial(build_dependency_graph(lc), Mapping((0, 1, 3, 2), 4))
    kids = [k for k in children(s, ag) if k.op == ("swap", 0, 1)]
    assert prune_children(s, kids, ag.tables, CostParams()) == kids


def test_fallback_on_inverted_neighbour():
    ag = ArchGraph(2, [(1, 0)])
    s = start(Circuit(2, [cnot(0, 1)]), ag)
    before = list(s.tau)
    out = fallback(s, ag, ag.tables)
    assert out.remaining == 0
    assert [g.name for g in out.pc] == ["h", "h", "cx", "h", "h"]
    assert out.tau == before


def test_fallback_keeps_the_mapping():
    ag = load_arch("qx5")
    lc = Circuit(4, [cnot(0, 3), cnot(1, 2)])
    s = start(lc, ag, Mapping((0, 8, 3, 14), 16))
    before = list(s.tau)
    out = fallback(s, ag, ag.tables)
    assert out.tau == before and out.wires == list(range(16))
    assert out.remaining < s.remaining


def test_oscillating_instance_needs_the_fallback():
    ag = line(8)
    lc = Circuit(8, [cnot(*q) for q in OSCILLATING])
    tau = Mapping.identity(8, 8)
    with pytest.raises(RoutingError):
        route(lc, ag, tau, CostParams(fallback_threshold=10 ** 9), step_limit=2000)
    pc, rep = route(lc, ag, tau)
    assert rep.fallback_count > 0
    assert rep.states_expanded <= rep.fallback_threshold * len(lc)
    assert check_equivalence(lc, pc, tau, rep.final_sigma)


def test_already_satisfied_circuit():
    ag = line(4)
    lc = Circuit(4, [cnot(0, 1), cnot(2, 1), cnot(3, 2)])
    pc, rep = route(lc, ag, Mapping.identity(4, 4))
    assert rep.added_gates == 0 and rep.states_expanded == 0
    assert [g.qubits for g in pc] == [(0, 1), (2, 1), (3, 2)]


def test_too_many_logical_qubits():
    with pytest.raises(RoutingError):
        route(Circuit(3, [cnot(0, 2)]), line(2), Mapping.identity(2, 2))


def _check_run(lc, ag, tau, params):
    pc, rep = route(lc, ag, tau, params)
    assert check_equivalence(lc, pc, tau, rep.final_sigma)
    assert all(ag.is_edge[g.control][g.target] for g in pc if g.is_cnot)
    assert rep.added_gates == rep.output_size - rep.original_size
    assert rep.added_gates == rep.swap_gates + rep.reversal_gates + rep.remote_gates
    assert rep.states_expanded <= rep.fallback_threshold * max(1, len(lc))
    # the executed source gates keep their dependency order
    order = [e.source for e in pc.executions]
    assert sorted(order) == list(range(len(lc)))
    dg = build_dependency_graph(lc)
    where = {g: i for i, g in enumerate(order)}
    assert all(where[p] < where[g] for g in range(len(lc)) for p in dg.parents[g])
    positions = [e.position for e in pc.executions]
    assert positions == sorted(set(positions)) and (not positions or positions[-1] <= len(pc))
    return pc, rep


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(["qx5", "q20", "line-8", "grid-3x3"]), st.integers(2, 8),
       st.integers(0, 60), st.integers(0, 2 ** 31), st.sampled_from([0, 1, 2]), st.booleans())
def test_routed_circuits_are_equivalent(arch, n, m, seed, depth, prune):
    ag = load_arch(arch)
    n = min(n, ag.num_nodes)
    rng = np.random.default_rng(seed)
    lc = random_cnot_circuit(n, m if depth < 2 else min(m, 20), rng)
    tau = Mapping(tuple(int(v) for v in rng.permutation(ag.num_nodes)[:n]), ag.num_nodes)
    _check_run(lc, ag, tau, CostParams(lookahead_depth=depth, prune=prune))


def test_directed_swap_cost_is_seven():
    ag = ArchGraph(3, [(0, 1), (2, 1)])
    s = start(Circuit(2, [cnot(0, 1)]), ag, Mapping((0, 2), 3))
    swaps = [k for k in children(s, ag) if k.op[0] == "swap"]
    assert swaps and {k.gcost for k in swaps} == {7}
    for k in swaps:
        assert len(k.ops) == 7 + k.executed


def test_fallback_threshold_from_diameter():
    assert CostParams().threshold(load_arch("q20").tables) == math.ceil(0.5 * 4)


def test_remote_block_realizes_the_gate():
    ag = line(5)
    lc = Circuit(5, [cnot(0, 4)])
    s = start(lc, ag)
    out = fallback(s, ag, ag.tables)
    assert gf2_of(out.pc, 5) == gf2_of([cnot(0, 4)], 5)
