"""Command-line front end: transform, verify, bench, gen and dist.

Exit codes: 0 success, 1 usage error, 2 input error, 3 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import secrets
import sys
import time
import zlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .arch import ArchError, distance_csv, load_arch
from .circuit import CircuitError
from .generators import FIXTURES, fixture_text, generate
from .mapping import Mapping, MappingError, SAParams, anneal, mapping_cost, select_cstar
from .qasm import QasmError, dump_qasm, emit_qasm, parse_qasm, read_qasm
from .router import CostParams, RoutingError, route
from .verify import VerificationError, check_full_programs

log = logging.getLogger("circuit_transform")

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_VERIFY = 0, 1, 2, 3
DEFAULT_WEIGHTS = (1.0, 1.0, 0.8, 0.6)


class UsageError(Exception):
    pass


class InputError(Exception):
    pass


class VerifyFailure(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


@dataclass
class RunConfig:
    arch: str
    inputs: list[str]
    output: Optional[str] = None
    report: Optional[str] = None
    seed: Optional[int] = None
    sa: SAParams = field(default_factory=SAParams)
    sa_restarts: int = 1
    sa_trace: Optional[str] = None
    use_sa: bool = True
    cost: CostParams = field(default_factory=CostParams)
    self_check: bool = False
    timing: bool = False


def _add_mapping_args(p):
    g = p.add_argument_group("initial mapping")
    g.add_argument("--seed", type=int, help="random seed (generated and recorded if omitted)")
    g.add_argument("--no-sa", action="store_true", help="place logical qubit i on node i")
    g.add_argument("--sa-tmax", type=float, default=100.0)
    g.add_argument("--sa-tmin", type=float, default=1.0)
    g.add_argument("--sa-delta", type=float, default=0.98)
    g.add_argument("--sa-r", type=int, default=100, help="iterations per temperature")
    g.add_argument("--sa-cap", type=int, default=1000, help="CNOTs used to score a mapping")
    g.add_argument("--sa-restarts", type=int, default=1)


def _add_router_args(p):
    g = p.add_argument_group("router")
    g.add_argument("--layers", type=int, default=None, help="look-ahead layers beyond the front")
    g.add_argument("--weights", default=None, help="w0,w1,...,wl,ws")
    g.add_argument("--fallback-k", type=int, default=None)
    g.add_argument("--depth", type=int, choices=(0, 1, 2), default=1)
    g.add_argument("--no-prune", action="store_true")
    g.add_argument("--self-check", action="store_true", help="verify the output before writing")
    g.add_argument("--timing", action="store_true", help="record wall time in the report")


def _cost_params(args) -> CostParams:
    if args.weights is not None:
        try:
            ws = [float(x) for x in args.weights.split(",")]
        except ValueError:
            raise UsageError(f"bad --weights {args.weights!r}") from None
        if len(ws) < 2:
            raise UsageError("--weights needs at least w0 and ws")
        layer_w, tail = ws[:-1], ws[-1]
        layers = len(layer_w) - 1 if args.layers is None else args.layers
    else:
        layers = 3 if args.layers is None else args.layers
        if layers < 0:
            raise UsageError("--layers must be non-negative")
        layer_w = list(DEFAULT_WEIGHTS[:layers + 1])
        layer_w += [DEFAULT_WEIGHTS[-1]] * (layers + 1 - len(layer_w))
        tail = 0.4
    try:
        return CostParams(layers, tuple(layer_w), tail, args.fallback_k, args.depth, not args.no_prune)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _sa_params(args, seed: int) -> SAParams:
    try:
        return SAParams(args.sa_tmax, args.sa_tmin, args.sa_delta, args.sa_r, seed, args.sa_cap)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _config(args, inputs) -> RunConfig:
    if args.sa_restarts < 1:
        raise UsageError("--sa-restarts must be >= 1")
    seed = args.seed if args.seed is not None else secrets.randbelow(2 ** 31)
    return RunConfig(
        arch=args.arch, inputs=inputs, output=getattr(args, "output", None),
        report=getattr(args, "report", None), seed=seed, sa=_sa_params(args, seed),
        sa_restarts=args.sa_restarts, sa_trace=getattr(args, "sa_trace", None),
        use_sa=not args.no_sa, cost=_cost_params(args), self_check=args.self_check,
        timing=args.timing,
    )


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror or exc}") from None


def _write(path: Optional[str], text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror or exc}") from None


def transform_text(text: str, cfg: RunConfig, ag=None):
    """Route one QASM program; returns (qasm text, report dict, trace)."""
    ag = ag if ag is not None else load_arch(cfg.arch)
    core, plan = parse_qasm(text)
    if core.num_qubits > ag.num_nodes:
        raise MappingError(f"circuit needs {core.num_qubits} qubits, {ag.name} has {ag.num_nodes}")
    trace = None
    if cfg.use_sa:
        params = SAParams(cfg.sa.t_max, cfg.sa.t_min, cfg.sa.delta, cfg.sa.r, cfg.seed, cfg.sa.subset_cap)
        tau, sa_cost, trace = anneal(core, ag, params, cfg.sa_restarts)
    else:
        tau = Mapping.identity(core.num_qubits, ag.num_nodes)
        sa_cost = mapping_cost(select_cstar(core, cfg.sa.subset_cap), tau, ag.tables) if core.cnots else 0
    pc, rep = route(core, ag, tau, cfg.cost, plan, self_check=cfg.self_check)
    out = emit_qasm(pc, plan, tau.assign, rep.final_sigma)
    if cfg.self_check:
        full, _ = read_qasm(text)
        routed, _ = read_qasm(out)
        if not check_full_programs(full, routed, tau, rep.final_sigma):
            raise VerifyFailure("routed program differs from the input")
    report = rep.to_dict(timing=cfg.timing)
    report.update(arch=ag.name, seed=cfg.seed, mapping_cost=int(sa_cost),
                  initial_mapping="sa" if cfg.use_sa else "identity",
                  cost_params={"lookahead_layers": cfg.cost.lookahead_layers,
                               "layer_weights": list(cfg.cost.layer_weights),
                               "tail_weight": cfg.cost.tail_weight,
                               "lookahead_depth": cfg.cost.lookahead_depth,
                               "prune": cfg.cost.prune},
                  qregs=plan.flattening())
    return out, report, trace


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def cmd_transform(args) -> int:
    cfg = _config(args, [args.input])
    if args.seed is None:
        log.info("using generated seed %d", cfg.seed)
    out, report, trace = transform_text(_read(args.input), cfg)
    report["input"] = Path(args.input).name
    _write(cfg.output, out)
    if cfg.report:
        _write(cfg.report, _dump_json(report))
    if args.sa_trace and trace is not None:
        _write(args.sa_trace, trace.to_csv())
    log.info("%s: %d -> %d gates (+%d)", args.input, report["original_size"],
             report["output_size"], report["added_gates"])
    return EXIT_OK


def cmd_verify(args) -> int:
    logical, lplan = read_qasm(_read(args.logical))
    physical, pplan = read_qasm(_read(args.physical))
    try:
        rep = json.loads(_read(args.report))
        tau = Mapping(tuple(rep["tau_ini"]), physical.num_qubits)
        sigma = [int(v) for v in rep["final_sigma"]]
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{args.report}: unusable report ({exc})") from None
    if len(tau) != logical.num_qubits:
        raise InputError("report mapping does not match the logical circuit")
    problems = []
    if not check_full_programs(logical, physical, tau, sigma):
        problems.append("gate action differs")
    want = sorted((sigma[tau[q]], c, b) for q, c, b in lplan.measures)
    if sorted(pplan.measures) != want:
        problems.append("measurements are on the wrong wires")
    if problems:
        print("FAIL: " + "; ".join(problems))
        return EXIT_VERIFY
    print("PASS")
    return EXIT_OK


def _baseline(path: str) -> dict[str, float]:
    rows = list(csv.DictReader(io.StringIO(_read(path))))
    if not rows:
        raise InputError(f"{path}: empty baseline")
    key = next((k for k in ("n_comp", "added") if k in rows[0]), None)
    if "name" not in rows[0] or key is None:
        raise InputError(f"{path}: baseline needs columns name and n_comp")
    try:
        return {r["name"]: float(r[key]) for r in rows}
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from None


def improvement_ratio(n_comp: float, n_ours: float) -> Optional[float]:
    if n_comp == 0:
        return None
    return (n_comp - n_ours) / n_comp


def circuit_seed(seed: int, name: str) -> int:
    return (seed + zlib.crc32(name.encode())) % 2 ** 31


def cmd_bench(args) -> int:
    corpus = Path(args.corpus)
    if not corpus.is_dir():
        raise InputError(f"{corpus}: not a directory")
    files = sorted(corpus.glob("*.qasm"))
    if not files:
        raise InputError(f"{corpus}: no .qasm files")
    cfg = _config(args, [str(f) for f in files])
    base = _baseline(args.baseline) if args.baseline else {}
    ag = load_arch(cfg.arch)
    rows = []
    for f in files:
        name = f.stem
        one = RunConfig(**{**cfg.__dict__, "seed": circuit_seed(cfg.seed, name)})
        t0 = time.perf_counter()
        try:
            _, rep, _ = transform_text(f.read_text(encoding="utf-8"), one, ag)
        except (QasmError, CircuitError, MappingError, RoutingError, VerifyFailure,
                VerificationError, UnicodeDecodeError) as exc:
            rows.append({"name": name, "status": f"error: {exc}"})
            continue
        row = {"name": name, "status": "ok", "original": rep["original_size"],
               "output": rep["output_size"], "added": rep["added_gates"],
               "time": round(time.perf_counter() - t0, 3)}
        if name in base:
            row["n_comp"] = base[name]
            r = improvement_ratio(base[name], row["added"])
            row["ratio"] = "" if r is None else round(r, 4)
        rows.append(row)
    cols = ["name", "status", "original", "output", "added", "time"]
    if base:
        cols += ["n_comp", "ratio"]
    buf = io.StringIO()
    w = csv.DictWriter(buf, cols, extrasaction="ignore", lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    if args.csv:
        _write(args.csv, buf.getvalue())
    width = max(len(r["name"]) for r in rows)
    print(f"{'circuit':<{width}}  {'orig':>7} {'out':>7} {'added':>7} {'time':>8}")
    for r in rows:
        if r["status"] != "ok":
            print(f"{r['name']:<{width}}  {r['status']}")
            continue
        print(f"{r['name']:<{width}}  {r['original']:>7} {r['output']:>7} {r['added']:>7} {r['time']:>8.2f}")
    joined = [r for r in rows if r["status"] == "ok" and "n_comp" in r]
    if joined:
        total = improvement_ratio(sum(r["n_comp"] for r in joined), sum(r["added"] for r in joined))
        print("aggregate improvement: " + ("n/a" if total is None else f"{100 * total:.2f}%"))
    return EXIT_OK


def cmd_gen(args) -> int:
    if args.kind == "fixture":
        if args.name not in FIXTURES:
            raise UsageError(f"unknown fixture {args.name!r}; choose from {', '.join(FIXTURES)}")
        _write(args.output, fixture_text(args.name))
        return EXIT_OK
    if args.n is None or args.n < 1:
        raise UsageError("-n must be a positive qubit count")
    try:
        circ = generate(args.kind, args.n, args.m, args.seed, args.steps, args.single_rate)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    _write(args.output, dump_qasm(circ))
    return EXIT_OK


def cmd_dist(args) -> int:
    ag = load_arch(args.arch)
    m = ag.tables.dist_cnot if args.kind == "cnot" else ag.tables.dist_u
    _write(args.output, distance_csv(m))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="circuit-transform", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    t = sub.add_parser("transform", help="map and route one QASM file")
    t.add_argument("input")
    t.add_argument("--arch", required=True, help="qx5, q20, line-N, grid-RxC or a JSON file")
    t.add_argument("-o", "--output", help="routed QASM (stdout if omitted)")
    t.add_argument("--report", help="JSON report path")
    t.add_argument("--sa-trace", help="CSV of the annealing trace")
    _add_mapping_args(t)
    _add_router_args(t)
    t.set_defaults(func=cmd_transform)

    v = sub.add_parser("verify", help="check a routed file against its source")
    v.add_argument("--logical", required=True)
    v.add_argument("--physical", required=True)
    v.add_argument("--report", required=True)
    v.set_defaults(func=cmd_verify)

    b = sub.add_parser("bench", help="route every .qasm file in a directory")
    b.add_argument("corpus")
    b.add_argument("--arch", required=True)
    b.add_argument("--baseline", help="CSV with columns name,n_comp")
    b.add_argument("--csv", help="write the result table here")
    _add_mapping_args(b)
    _add_router_args(b)
    b.set_defaults(func=cmd_bench)

    g = sub.add_parser("gen", help="write a generated or vendored circuit")
    g.add_argument("kind", choices=("qft", "ising", "random", "fixture"))
    g.add_argument("name", nargs="?", help="fixture name (kind=fixture)")
    g.add_argument("-n", type=int, help="qubits")
    g.add_argument("-m", type=int, help="CNOT count (random)")
    g.add_argument("--steps", type=int, default=5, help="Trotter steps (ising)")
    g.add_argument("--single-rate", type=float, default=0.0,
                   help="chance of a single-qubit gate before each CNOT (random)")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("-o", "--output")
    g.set_defaults(func=cmd_gen)

    d = sub.add_parser("dist", help="dump a distance matrix as CSV")
    d.add_argument("--arch", required=True)
    d.add_argument("--kind", choices=("cnot", "undirected"), default="cnot")
    d.add_argument("-o", "--output")
    d.set_defaults(func=cmd_dist)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except QasmError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (InputError, ArchError, MappingError, CircuitError, UnicodeDecodeError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (VerifyFailure, VerificationError) as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except RoutingError as exc:
        print(f"routing failed: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
