"""Equivalence checking for routed circuits.

Two independent semantics are provided: the GF(2) linear map of a CNOT-only
circuit on computational basis states, and a stabilizer tableau (images of
the X and Z generators with exact signs) for Clifford circuits.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .circuit import Circuit, Gate
from .mapping import Mapping


class VerificationError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Gf2Map:
    matrix: np.ndarray  # row t is the parity mask producing output bit t

    def __eq__(self, other):
        return isinstance(other, Gf2Map) and np.array_equal(self.matrix, other.matrix)

    __hash__ = None

    def is_invertible(self) -> bool:
        m = self.matrix.copy()
        n = len(m)
        for col in range(n):
            pivot = next((r for r in range(col, n) if m[r, col]), None)
            if pivot is None:
                return False
            m[[col, pivot]] = m[[pivot, col]]
            for r in range(n):
                if r != col and m[r, col]:
                    m[r] ^= m[col]
        return True


def gf2_of(gates: Iterable[Gate], n: int) -> Gf2Map:
    m = np.eye(n, dtype=bool)
    for g in gates:
        if not g.is_cnot:
            raise VerificationError(f"{g!r} is not a CNOT")
        m[g.target] ^= m[g.control]
    return Gf2Map(m)


@dataclass(eq=False)
class CliffordTableau:
    """Rows 0..n-1 are the images of X_0..X_{n-1}, rows n..2n-1 of Z_0..Z_{n-1};
    ``r`` holds the sign bits."""

    x: np.ndarray
    z: np.ndarray
    r: np.ndarray

    @classmethod
    def identity(cls, n: int) -> "CliffordTableau":
        eye = np.eye(n, dtype=bool)
        zero = np.zeros((n, n), dtype=bool)
        return cls(np.vstack([eye, zero]), np.vstack([zero, eye]), np.zeros(2 * n, dtype=bool))

    @property
    def num_qubits(self) -> int:
        return self.x.shape[1]

    def __eq__(self, other):
        return (isinstance(other, CliffordTableau)
                and np.array_equal(self.x, other.x)
                and np.array_equal(self.z, other.z)
                and np.array_equal(self.r, other.r))

    __hash__ = None

    def h(self, a):
        x, z = self.x[:, a], self.z[:, a]
        self.r ^= x & z
        self.x[:, a], self.z[:, a] = z.copy(), x.copy()

    def s(self, a):
        self.r ^= self.x[:, a] & self.z[:, a]
        self.z[:, a] ^= self.x[:, a]

    def cx(self, a, b):
        xa, xb, za, zb = self.x[:, a], self.x[:, b], self.z[:, a], self.z[:, b]
        self.r ^= xa & zb & ~(xb ^ za)
        self.x[:, b] ^= xa
        self.z[:, a] ^= zb

    def apply(self, g: Gate) -> None:
        q = g.qubits
        if g.name == "cx":
            self.cx(*q)
        elif g.name == "h":
            self.h(q[0])
        elif g.name == "s":
            self.s(q[0])
        elif g.name == "sdg":
            for _ in range(3):
                self.s(q[0])
        elif g.name == "x":
            self.r ^= self.z[:, q[0]]
        elif g.name == "z":
            self.r ^= self.x[:, q[0]]
        elif g.name == "y":
            self.r ^= self.x[:, q[0]] ^ self.z[:, q[0]]
        else:
            raise VerificationError(f"gate {g.name!r} is outside the Clifford set")

    def permuted(self, sigma: Sequence[int]) -> "CliffordTableau":
        """Tableau followed by moving the content of wire w onto wire sigma[w]."""
        idx = np.empty(len(sigma), dtype=np.intp)
        idx[np.asarray(sigma)] = np.arange(len(sigma))
        return CliffordTableau(self.x[:, idx], self.z[:, idx], self.r.copy())

    def is_symplectic(self) -> bool:
        n = self.num_qubits
        x, z = self.x.astype(np.int64), self.z.astype(np.int64)
        form = (x @ z.T + z @ x.T) % 2
        want = np.zeros((2 * n, 2 * n), dtype=np.int64)
        want[:n, n:] = want[n:, :n] = np.eye(n, dtype=np.int64)
        return np.array_equal(form, want)


def tableau_of(gates: Iterable[Gate], n: int) -> CliffordTableau:
    t = CliffordTableau.identity(n)
    for g in gates:
        t.apply(g)
    return t


def embed(lc: Circuit, tau_ini: Mapping, num_physical: Optional[int] = None) -> Circuit:
    """``lc`` placed on the physical wires chosen by ``tau_ini``."""
    n = tau_ini.num_physical if num_physical is None else num_physical
    return Circuit(n, [g.relabel(tau_ini.assign) for g in lc.gates], "physical")


def check_equivalence(lc: Circuit, pc: Circuit, tau_ini: Mapping,
                      sigma_final: Sequence[int]) -> bool:
    """True iff ``pc`` equals ``lc`` placed by ``tau_ini`` and followed by
    the wire permutation ``sigma_final``, signs included."""
    n = pc.num_qubits
    if tau_ini.num_physical != n or len(sigma_final) != n or lc.num_qubits != len(tau_ini):
        raise VerificationError("dimension mismatch between circuits, mapping and permutation")
    if sorted(sigma_final) != list(range(n)):
        raise VerificationError("sigma is not a permutation")
    want = tableau_of(embed(lc, tau_ini).gates, n).permuted(sigma_final)
    return tableau_of(pc.gates, n) == want


# Clifford stand-ins for gates outside the tableau formalism. The same
# substitution is applied to both circuits being compared, so a stand-in
# only needs to be a fixed, non-trivial Clifford that catches misplacement.
_STAND_INS = {
    "t": ("s",),
    "tdg": ("sdg",),
    "u1": ("s",),
    "rz": ("s",),
    "rx": ("h", "s", "h"),
    "ry": ("s", "h", "s"),
    "u2": ("h", "s"),
    "u3": ("s", "h", "s", "h"),
}


def clifford_surrogate(gates: Iterable[Gate]) -> list[Gate]:
    out = []
    for g in gates:
        if g.name in _STAND_INS:
            out += [Gate(name, g.qubits, (), g.origin) for name in _STAND_INS[g.name]]
        else:
            out.append(g)
    return out


def check_full_programs(logical: Circuit, physical: Circuit, tau_ini: Mapping,
                        sigma_final: Sequence[int]) -> bool:
    """Equivalence of whole programs, single-qubit gates included, with
    non-Clifford gates replaced by the same Clifford stand-ins on both sides."""
    lc = Circuit(logical.num_qubits, clifford_surrogate(logical.gates))
    pc = Circuit(physical.num_qubits, clifford_surrogate(physical.gates), "physical")
    return check_equivalence(lc, pc, tau_ini, sigma_final)
