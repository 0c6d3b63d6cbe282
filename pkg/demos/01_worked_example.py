"""
One step of the look-ahead search
=================================

Route a small arithmetic circuit on an eight-node device with one-way
couplings, and look at how the first search step is chosen: every child
state is scored by its own cost and by the best state one more move away.
"""

from circuit_transform import ArchGraph, CostParams, Mapping, route
from circuit_transform.dag import build_dependency_graph
from circuit_transform.generators import fixture_text
from circuit_transform.qasm import parse_qasm
from circuit_transform.router import SearchState, children, cost_h, execute_all, min_child_hcost

# A directed coupling graph; a CNOT runs only along an arrow.
device = ArchGraph(8, [(1, 0), (1, 2), (2, 3), (3, 4), (5, 0), (5, 2), (4, 5),
                       (4, 6), (6, 7)], "eight-node")
print("diameter:", device.tables.diameter)

# The CNOT core of alu-v0_27 (single-qubit gates are carried along separately)
core, plan = parse_qasm(fixture_text("alu-v0_27"))
print(f"{len(core)} CNOTs on {core.num_qubits} qubits, {len(plan)} other gates set aside")

# Place logical qubit i on node i and run whatever is already executable
state = execute_all(SearchState.initial(build_dependency_graph(core), Mapping.identity(5, 8)), device)
print("executed up front:", [g.qubits for g in state.pc])

params = CostParams()
print(f"\n{'move':<16}{'gates':>6}{'cost_h':>9}{'+ best next':>13}")
for kid in children(state, device):
    look = kid.gcost + min_child_hcost(kid, device, device.tables, params)
    print(f"{str(kid.op):<16}{kid.gcost:>6}{cost_h(kid, device.tables, params):>9.1f}{look:>13.1f}")

# The swap on nodes 1 and 2 wins: it unlocks three gates, and its best
# follow-up is cheaper than any other pair of moves.
pc, report = route(core, device, Mapping.identity(5, 8), params)
print(f"\nrouted: {report.original_size} -> {report.output_size} gates "
      f"({report.swap_count} swaps, {report.reversal_count} reversals, {report.fallback_count} fallbacks)")
