"""
Routing a benchmark and checking the result
===========================================

Map, route and verify every bundled benchmark on the 20-qubit grid-like
device and on the 16-qubit one-way ladder.
"""

import time

from circuit_transform import SAParams, anneal, load_arch, route
from circuit_transform.generators import FIXTURES, fixture_text
from circuit_transform.qasm import parse_qasm
from circuit_transform.verify import check_equivalence

for arch in ("q20", "qx5"):
    ag = load_arch(arch)
    print(f"\n{arch}: {ag.num_nodes} nodes, diameter {ag.tables.diameter}")
    print(f"{'circuit':<18}{'cnots':>6}{'added':>7}{'swaps':>7}{'rev':>5}{'fb':>4}{'secs':>7}  ok")
    for name in sorted(FIXTURES):
        core, _ = parse_qasm(fixture_text(name))
        t0 = time.perf_counter()
        tau, _, _ = anneal(core, ag, SAParams(seed=0))
        pc, rep = route(core, ag, tau)
        secs = time.perf_counter() - t0
        # the stabilizer tableau of the output, with the final wire permutation
        # undone, must equal the input's
        ok = check_equivalence(core, pc, tau, rep.final_sigma)
        print(f"{name:<18}{len(core):>6}{rep.added_gates:>7}{rep.swap_count:>7}"
              f"{rep.reversal_count:>5}{rep.fallback_count:>4}{secs:>7.2f}  {ok}")
