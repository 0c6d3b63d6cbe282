"""Architecture (coupling) graphs and their precomputed distance tables."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from functools import cached_property
from importlib import resources
from pathlib import Path
from typing import Iterable, Union

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, shortest_path

BUILTIN_FILES = {"qx5": "qx5.json", "q20": "q20.json"}


class ArchError(ValueError):
    pass


@dataclass(frozen=True)
class DistanceTables:
    dist_u: np.ndarray     # undirected hop counts
    dist_cnot: np.ndarray  # auxiliary gates needed to run cx(u, v)
    diameter: int
    n_swap: int            # gates per SWAP: 3 if every edge is two-way, else 7

    @cached_property
    def cnot_rows(self) -> list[list[int]]:
        """``dist_cnot`` as nested lists, for fast scalar lookups."""
        return self.dist_cnot.tolist()


@dataclass(frozen=True)
class ArchGraph:
    num_nodes: int
    edges: frozenset = field(default_factory=frozenset)
    name: str = "custom"

    def __post_init__(self):
        edges = frozenset((int(u), int(v)) for u, v in self.edges)
        object.__setattr__(self, "edges", edges)
        if self.num_nodes < 1:
            raise ArchError("architecture needs at least one node")
        for u, v in edges:
            if u == v:
                raise ArchError(f"self-loop on node {u}")
            if not (0 <= u < self.num_nodes and 0 <= v < self.num_nodes):
                raise ArchError(f"edge ({u},{v}) outside 0..{self.num_nodes - 1}")
        if self.num_nodes > 1:
            n_comp, _ = connected_components(self._adjacency(), directed=False)
            if n_comp != 1:
                raise ArchError(f"architecture {self.name!r} is disconnected")

    def _adjacency(self) -> csr_matrix:
        n = self.num_nodes
        if not self.edges:
            return csr_matrix((n, n))
        u, v = np.array(sorted(self.edges)).T
        return csr_matrix((np.ones(len(u)), (u, v)), shape=(n, n))

    @cached_property
    def bidirectional(self) -> bool:
        return all((v, u) in self.edges for u, v in self.edges)

    @cached_property
    def pairs(self) -> tuple[tuple[int, int], ...]:
        """Undirected edges as sorted (low, high) pairs."""
        return tuple(sorted({(min(e), max(e)) for e in self.edges}))

    @cached_property
    def neighbors(self) -> tuple[tuple[int, ...], ...]:
        nb: list[set] = [set() for _ in range(self.num_nodes)]
        for u, v in self.edges:
            nb[u].add(v)
            nb[v].add(u)
        return tuple(tuple(sorted(s)) for s in nb)

    @cached_property
    def is_edge(self) -> list[list[bool]]:
        m = [[False] * self.num_nodes for _ in range(self.num_nodes)]
        for u, v in self.edges:
            m[u][v] = True
        return m

    def has_pair(self, u: int, v: int) -> bool:
        return (u, v) in self.edges or (v, u) in self.edges

    @cached_property
    def tables(self) -> DistanceTables:
        du = undirected_distances(self)
        return DistanceTables(du, cnot_distances(self, du), int(du.max()),
                              3 if self.bidirectional else 7)


def line(n: int) -> ArchGraph:
    edges = [(i, i + 1) for i in range(n - 1)]
    return ArchGraph(n, edges + [(v, u) for u, v in edges], f"line-{n}")


def grid(rows: int, cols: int) -> ArchGraph:
    edges = []
    for r in range(rows):
        for c in range(cols):
            k = r * cols + c
            if c + 1 < cols:
                edges.append((k, k + 1))
            if r + 1 < rows:
                edges.append((k, k + cols))
    return ArchGraph(rows * cols, edges + [(v, u) for u, v in edges], f"grid-{rows}x{cols}")


def from_dict(data: dict) -> ArchGraph:
    try:
        n = int(data["num_qubits"])
        edges = [(int(u), int(v)) for u, v in data["edges"]]
        name = str(data.get("name", "custom"))
        both = bool(data.get("bidirectional", False))
    except (KeyError, TypeError, ValueError) as exc:
        raise ArchError(f"malformed architecture description: {exc}") from None
    if both:
        edges += [(v, u) for u, v in edges]
    return ArchGraph(n, edges, name)


def load_arch(source: Union[str, Path]) -> ArchGraph:
    """Build an architecture from a built-in name or a JSON description file.

    Built-in names: ``qx5``, ``q20``, ``line-N`` and ``grid-RxC``.
    """
    key = str(source)
    if key in BUILTIN_FILES:
        text = resources.files(__package__).joinpath("data", "arch", BUILTIN_FILES[key]).read_text()
        return from_dict(json.loads(text))
    m = re.fullmatch(r"line-(\d+)", key)
    if m:
        return line(int(m.group(1)))
    m = re.fullmatch(r"grid-(\d+)x(\d+)", key)
    if m:
        return grid(int(m.group(1)), int(m.group(2)))
    path = Path(key)
    if not path.is_file():
        raise ArchError(f"unknown architecture {key!r}")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ArchError(f"{path}: {exc}") from None
    return from_dict(data)


def undirected_distances(ag: ArchGraph) -> np.ndarray:
    d = shortest_path(ag._adjacency(), method="D", directed=False, unweighted=True)
    return d.astype(np.int64)


def cnot_distances(ag: ArchGraph, dist_u: np.ndarray | None = None) -> np.ndarray:
    """All-pairs CNOT distance; the diagonal is 0 by convention."""
    du = undirected_distances(ag) if dist_u is None else dist_u
    steps = np.maximum(du - 1, 0)
    if ag.bidirectional:
        return 3 * steps
    # a forward edge (a, b) lies on some undirected shortest v -> w path
    forward = np.zeros_like(du, dtype=bool)
    for a, b in ag.edges:
        forward |= (du[:, a][:, None] + 1 + du[b, :][None, :]) == du
    out = 7 * steps + np.where(forward, 0, 4)
    np.fill_diagonal(out, 0)
    return out


def cnot_distance(ag: ArchGraph, v: int, w: int) -> int:
    if v == w:
        raise ArchError(f"CNOT distance from node {v} to itself is undefined")
    return int(ag.tables.dist_cnot[v, w])


def diameter(ag: ArchGraph) -> int:
    return ag.tables.diameter


def distance_csv(matrix: np.ndarray) -> str:
    n = matrix.shape[0]
    rows = ["node," + ",".join(str(j) for j in range(n))]
    rows += [f"{i}," + ",".join(str(int(x)) for x in matrix[i]) for i in range(n)]
    return "\n".join(rows) + "\n"


def edge_list(ag: ArchGraph) -> Iterable[tuple[int, int]]:
    return sorted(ag.edges)
