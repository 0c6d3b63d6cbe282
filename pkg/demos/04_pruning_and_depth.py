"""
Pruning and look-ahead depth
============================

How much search work pruning saves, and what deeper look-ahead buys, on
random circuits over the 20-qubit device.
"""

import time

import numpy as np

from circuit_transform import CostParams, SAParams, anneal, load_arch, route
from circuit_transform.generators import random_cnot_circuit

q20 = load_arch("q20")
rng = np.random.default_rng(7)
circuits = [random_cnot_circuit(10, 80, rng) for _ in range(4)]
placements = [anneal(c, q20, SAParams(seed=0))[0] for c in circuits]

print(f"{'depth':>5}{'prune':>7}{'added':>8}{'look-ahead states':>19}{'secs':>7}")
for depth in (0, 1, 2):
    for prune in (True, False):
        params = CostParams(lookahead_depth=depth, prune=prune)
        added = evaluated = 0
        t0 = time.perf_counter()
        for c, tau in zip(circuits, placements):
            _, rep = route(c, q20, tau, params)
            added += rep.added_gates
            evaluated += rep.grandchildren_evaluated
        print(f"{depth:>5}{str(prune):>7}{added:>8}{evaluated:>19}{time.perf_counter() - t0:>7.2f}")
