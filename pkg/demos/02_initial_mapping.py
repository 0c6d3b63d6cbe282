"""
Annealing an initial placement
==============================

Compare the identity placement with one found by simulated annealing,
scored as the summed CNOT distance over the circuit's gates.
"""

import numpy as np

from circuit_transform import SAParams, anneal, load_arch
from circuit_transform.generators import FIXTURES, fixture_text
from circuit_transform.mapping import Mapping, mapping_cost, select_cstar
from circuit_transform.qasm import parse_qasm

qx5 = load_arch("qx5")
d = qx5.tables.dist_cnot
# Moving a CNOT against a one-way edge costs 4 Hadamards; farther pairs need swaps too
print("CNOT distance 3 -> 1 on qx5:", d[3, 1])
print("largest distance:", d.max(), " mean:", round(float(d[d > 0].mean()), 2))

print(f"\n{'circuit':<18}{'identity':>9}{'annealed':>10}")
for name in sorted(FIXTURES):
    lc, _ = parse_qasm(fixture_text(name))
    naive = mapping_cost(select_cstar(lc, 1000), Mapping.identity(lc.num_qubits, 16), qx5.tables)
    tau, cost, trace = anneal(lc, qx5, SAParams(seed=0))
    print(f"{name:<18}{naive:>9}{cost:>10}")

# The accepted cost wanders while the temperature is high, then settles
lc, _ = parse_qasm(fixture_text("4gt13_92"))
_, _, trace = anneal(lc, qx5, SAParams(seed=0))
acc = np.array(trace.accepted)
for start in trace.epoch_starts[::40]:
    chunk = acc[start:start + 100]
    print(f"iteration {start:>6}: accepted cost {chunk.min():>4}..{chunk.max():<4} best {trace.best[start]}")
