"""Benchmark circuits: parametric families, random circuits and the
vendored fixture set."""

from __future__ import annotations

import math
from importlib import resources
from typing import Optional

import numpy as np

from .circuit import Circuit, Gate, cnot, hadamard

# name -> (qubits, gates, cnots) of the vendored files
FIXTURES = {
    "4mod5-v1_22": (5, 21, 11),
    "mod5mils_65": (5, 35, 16),
    "alu-v0_27": (5, 36, 17),
    "4gt13_92": (5, 66, 30),
    "ising_model_10": (10, 480, 90),
    "ising_model_13": (13, 633, 120),
    "ising_model_16": (16, 786, 150),
    "qft_10": (10, 200, 90),
    "qft_16": (16, 512, 240),
}


def _rz(q: int, theta: float) -> Gate:
    return Gate("rz", (q,), (round(float(theta), 6),))


def qft(n: int) -> Circuit:
    """Textbook QFT with each controlled phase as rz, cx, rz, cx on the
    control, followed by a closing Hadamard layer. Size is 2n^2."""
    gates = []
    for i in range(n):
        gates.append(hadamard(i))
        for j in range(i + 1, n):
            theta = math.pi / 2 ** (j - i + 1)
            gates += [_rz(i, -theta), cnot(i, j), _rz(i, theta), cnot(i, j)]
    gates += [hadamard(i) for i in range(n)]
    return Circuit(n, gates)


def ising(n: int, steps: int = 5, seed: int = 0) -> Circuit:
    """Trotterized 1-D transverse-field Ising evolution.

    Each step applies a ZZ rotation (two CNOTs and four rz) to the even bonds
    and then the odd bonds, followed by an X rotation (h rz h) and a Z field
    on every site. Angles are drawn from ``seed``; only the gate structure
    matters for routing.
    """
    rng = np.random.default_rng(seed)
    gates = [hadamard(q) for q in range(n)]
    bonds = [(i, i + 1) for i in range(0, n - 1, 2)] + [(i, i + 1) for i in range(1, n - 1, 2)]
    for _ in range(steps):
        for a, b in bonds:
            h, j = rng.uniform(-1, 1, 2)
            gates += [_rz(a, h), _rz(b, -h), _rz(b, 4 * j), cnot(a, b), _rz(b, -2 * j), cnot(a, b)]
        x = rng.uniform(-2, 2)
        for q in range(n):
            gates += [hadamard(q), _rz(q, x), hadamard(q)]
        gates += [_rz(q, rng.uniform(-2, 2)) for q in range(n)]
    return Circuit(n, gates)


def random_cnot_circuit(n: int, m: int, rng: np.random.Generator,
                        single_qubit_rate: float = 0.0) -> Circuit:
    """``m`` CNOTs on uniformly random ordered pairs of ``n`` qubits, each
    optionally preceded by single-qubit gates drawn at ``single_qubit_rate``."""
    if n < 2:
        raise ValueError("need at least two qubits")
    singles = ("h", "t", "s", "x", "tdg")
    gates = []
    for _ in range(m):
        while single_qubit_rate and rng.random() < single_qubit_rate:
            gates.append(Gate(singles[int(rng.integers(len(singles)))], (int(rng.integers(n)),)))
        c = int(rng.integers(n))
        t = int(rng.integers(n - 1))
        t += t >= c
        gates.append(cnot(c, t))
    return Circuit(n, gates)


def fixture_text(name: str) -> str:
    if name not in FIXTURES:
        raise KeyError(f"unknown fixture {name!r}")
    return resources.files(__package__).joinpath("data", "circuits", f"{name}.qasm").read_text()


def generate(kind: str, n: int, m: Optional[int] = None, seed: int = 0,
             steps: int = 5, single_qubit_rate: float = 0.0) -> Circuit:
    if kind == "qft":
        return qft(n)
    if kind == "ising":
        return ising(n, steps, seed)
    if kind == "random":
        if m is None:
            raise ValueError("random circuits need a gate count")
        return random_cnot_circuit(n, m, np.random.default_rng(seed), single_qubit_rate)
    raise ValueError(f"unknown generator {kind!r}")
