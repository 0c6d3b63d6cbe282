"""Map and route CNOT circuits onto restricted qubit connectivity."""

from .arch import ArchGraph, DistanceTables, load_arch
from .circuit import Circuit, Gate, PassthroughPlan, merge_core, split_core
from .mapping import Mapping, SAParams, anneal
from .qasm import emit_qasm, parse_qasm
from .router import CostParams, RouteReport, route

__all__ = [
    "ArchGraph", "DistanceTables", "load_arch", "Circuit", "Gate", "PassthroughPlan",
    "merge_core", "split_core", "Mapping", "SAParams", "anneal", "emit_qasm",
    "parse_qasm", "CostParams", "RouteReport", "route",
]
__version__ = "0.1.0"
