"""``irpbench`` command line.

Exit codes: 0 success, 1 a check or solve failed, 2 usage or input error.
Every subcommand accepts ``--config FILE``, a flat ``key = value`` file
whose keys are the long flag names (``time-limit = 30``); flags given on
the command line win.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time
from pathlib import Path

import numpy as np

from ..formulations import (BEKTAS_COLUMNS, FormulationSpec, TspBase, TspVariant, build_irp,
                            build_tsp, build_wagner_whitin_milp, build_wagner_whitin_sp, decode_irp,
                            rounding_heuristic, trivial_start)
from ..instance import (IrpInstance, generate_design1, generate_design2, generate_random, load_instance,
                        save_instance)
from ..milp import export_lp, export_mps, lp_relaxation
from ..oracles import OracleSizeError, brute_force_irp, held_karp_tsp, wagner_whitin_dp
from ..solver import SolverConfig, solve_lp, solve_mip
from .runner import (DESK_MAX_PERIODS, DESK_MAX_RETAILERS, ExperimentPlan, PlanError, ResultRow,
                     run_plan, write_rows)

__all__ = ["main", "build_parser", "read_config", "verify_matrix"]

log = logging.getLogger("irpbench")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
REL_TOL = 1e-6


class UsageError(Exception):
    pass


def _ints(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(t) for t in text.replace(" ", "").split(",") if t)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _names(text: str) -> tuple[str, ...]:
    return tuple(t.strip() for t in text.split(",") if t.strip())


def _floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(t) for t in text.replace(" ", "").split(",") if t)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _bool(text: str) -> bool:
    low = str(text).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


def read_config(path: str | Path) -> dict[str, str]:
    """Parse a flat ``key = value`` file; ``#`` starts a comment."""
    out = {}
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            raise UsageError(f"{path}:{lineno}: expected key = value")
        out[key.strip().lstrip("-").replace("_", "-")] = value.strip()
    return out


def _common(p: argparse.ArgumentParser, time_limit: bool = True) -> None:
    p.add_argument("--config", help="key = value file with defaults for these flags")
    p.add_argument("--seed", type=int, default=0, help="generator seed (default 0)")
    p.add_argument("--out", help="output path")
    if time_limit:
        p.add_argument("--time-limit", type=float, default=60.0,
                       help="solver wall-clock limit in seconds (default 60)")
    p.add_argument("-v", "--verbose", action="store_true")


def _instance_source(p: argparse.ArgumentParser) -> None:
    p.add_argument("--instance", help="instance file; otherwise generated from the flags below")
    p.add_argument("--design", choices=("1", "2", "random"), default="random")
    p.add_argument("--periods", type=int, default=3)
    p.add_argument("--retailers", type=int, default=3)
    p.add_argument("--scenario", type=int, default=1, help="design 2 scenario id (1..18)")


def _formulation(p: argparse.ArgumentParser) -> None:
    p.add_argument("--inv", default="CMILP", help="inventory model: CMILP or SP")
    p.add_argument("--tsp", default="DL", help="routing variant, e.g. MTZ, DL+NR, SC, 2C")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="irpbench", description=(
        "Build, solve and cross-check inventory routing formulations."))
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    p = sub.add_parser("gen", help="generate an instance file")
    _common(p, time_limit=False)
    _instance_source(p)

    p = sub.add_parser("build", help="write the LP or MPS file of one formulation")
    _common(p, time_limit=False)
    _instance_source(p)
    _formulation(p)
    p.add_argument("--format", choices=("lp", "mps"), help="defaults to the --out suffix")
    p.add_argument("--relax", type=_bool, default=False, help="write the LP relaxation")

    p = sub.add_parser("solve", help="solve one instance with one formulation")
    _common(p)
    _instance_source(p)
    _formulation(p)
    p.add_argument("--lp", type=_bool, default=False, help="solve the LP relaxation only")
    p.add_argument("--node-limit", type=int)

    p = sub.add_parser("bench", help="run an experiment plan and write CSV files")
    _common(p)
    p.add_argument("--source", choices=("random", "design1", "design2", "files"), default="random")
    p.add_argument("--formulations", type=_names, default=("CMILP+MTZ", "CMILP+DL", "CMILP+SC"),
                   help="comma-separated names such as CMILP+DL,SP+SC")
    p.add_argument("--periods", type=_ints, default=(3,))
    p.add_argument("--retailers", type=_ints, default=(3,))
    p.add_argument("--scenarios", type=_ints, default=())
    p.add_argument("--d2-retailers", type=int)
    p.add_argument("--d2-periods", type=int)
    p.add_argument("--files", type=_names, default=())
    p.add_argument("--seeds", type=int, default=5, help="repetitions per cell, seeds seed..seed+k-1")
    p.add_argument("--modes", type=_names, default=("MIP",), help="MIP, LP or MIP,LP")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--timing", type=_bool, default=True, help="false writes NA times")
    p.add_argument("--full-scale", type=_bool, default=False,
                   help=f"allow r > {DESK_MAX_RETAILERS} or N > {DESK_MAX_PERIODS}")

    p = sub.add_parser("oracle", help="exact answer by enumeration or dynamic programming")
    _common(p, time_limit=False)
    _instance_source(p)
    p.add_argument("--kind", choices=("irp", "tsp", "ww"), default="irp")
    p.add_argument("--demand", type=_floats, help="series for --kind ww")
    p.add_argument("--K", type=float, default=0.0, help="setup cost for --kind ww")
    p.add_argument("--h", type=float, default=0.0, help="holding cost for --kind ww")

    p = sub.add_parser("verify", help="check every formulation against the oracles")
    _common(p)
    p.add_argument("--max-r", type=int, default=3)
    p.add_argument("--max-n", type=int, default=2)
    p.add_argument("--seeds", type=int, default=5)
    p.add_argument("--lifted", type=_bool, default=True,
                   help="include the lifted-inequality columns")
    return parser


def _parse(argv) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        cfg = read_config(args.config)
        sub = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest: a for a in sub._actions if a.option_strings}
        defaults = {}
        for key, value in cfg.items():
            dest = key.replace("-", "_")
            if dest not in known or dest == "config":
                raise UsageError(f"config key {key!r} is not a flag of {args.command}")
            action = known[dest]
            if action.type is not None:
                try:
                    value = action.type(value)
                except (argparse.ArgumentTypeError, ValueError) as exc:
                    raise UsageError(f"config key {key!r}: {exc}") from None
            if action.choices is not None and value not in action.choices:
                raise UsageError(f"config key {key!r} must be one of {sorted(action.choices)}")
            defaults[dest] = value
        sub.set_defaults(**defaults)
        args = parser.parse_args(argv)
    return args


def _load(args) -> IrpInstance:
    if args.instance:
        return load_instance(args.instance)
    if args.design == "1":
        return generate_design1(args.seed, args.periods, args.retailers)
    if args.design == "2":
        return generate_design2(args.scenario, args.seed, retailers=args.retailers,
                                periods=args.periods)
    return generate_random(args.seed, args.retailers, args.periods)


def _spec(args) -> FormulationSpec:
    try:
        return FormulationSpec.parse(f"{args.inv}+{args.tsp}")
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _require_out(args) -> Path:
    if not args.out:
        raise UsageError("--out is required")
    return Path(args.out)


def cmd_gen(args) -> int:
    inst = _load(args)
    out = _require_out(args)
    save_instance(inst, out)
    print(f"wrote {out} ({inst.name}: r={inst.num_retailers}, N={inst.num_periods})")
    return EXIT_OK


def cmd_build(args) -> int:
    inst, spec = _load(args), _spec(args)
    out = _require_out(args)
    fmt = args.format or out.suffix.lstrip(".").lower()
    if fmt not in ("lp", "mps"):
        raise UsageError("cannot tell the format from --out; pass --format lp|mps")
    model, index = build_irp(inst, spec)
    if args.relax:
        model = lp_relaxation(model)
    (export_lp if fmt == "lp" else export_mps)(model, out, index)
    print(f"wrote {out}: {model.num_vars} columns, {model.num_constraints} rows ({spec.name})")
    return EXIT_OK


def cmd_solve(args) -> int:
    inst, spec = _load(args), _spec(args)
    t0 = time.perf_counter()
    model, index = build_irp(inst, spec)
    if args.lp:
        sol = solve_lp(lp_relaxation(model), time_limit=args.time_limit)
        value = sol.objective if sol.status == "optimal" else None
        row = ResultRow(inst.name, spec.name, "LP", time.perf_counter() - t0, None, value,
                        sol.status, inst.num_periods, inst.num_retailers)
        print(f"{spec.name} LP relaxation: status {sol.status}, value {value}")
    else:
        config = SolverConfig(time_limit=args.time_limit, node_limit=args.node_limit)
        res = solve_mip(model, config, start=trivial_start(inst, spec, model, index),
                        heuristic=rounding_heuristic(inst, spec, model, index))
        row = ResultRow(inst.name, spec.name, "MIP", time.perf_counter() - t0, res.gap_percent,
                        res.incumbent, res.status, inst.num_periods, inst.num_retailers)
        print(f"{spec.name}: status {res.status}, best {res.incumbent}, bound {res.bound}, "
              f"gap {res.gap_percent:.4f}%, nodes {res.nodes}, {res.wall_seconds:.2f}s")
        if res.solution is not None:
            plan = decode_irp(inst, index, res.solution, model).plan
            for t, route in enumerate(plan.routes, 1):
                print(f"  period {t}: route {'-'.join(map(str, route))}")
    if args.out:
        write_rows([row], args.out)
    return EXIT_OK


def cmd_bench(args) -> int:
    if not args.out:
        raise UsageError("--out (output directory) is required")
    plan = ExperimentPlan(
        formulations=args.formulations, source=args.source, periods=args.periods,
        retailers=args.retailers, scenarios=args.scenarios, d2_retailers=args.d2_retailers,
        d2_periods=args.d2_periods, files=args.files,
        seeds=tuple(range(args.seed, args.seed + args.seeds)),
        modes=tuple(m.upper() for m in args.modes),
        config=SolverConfig(time_limit=args.time_limit), out_dir=args.out,
        timing=args.timing, workers=args.workers, full_scale=args.full_scale)
    paths = run_plan(plan)
    for path in paths.values():
        print(f"wrote {path}")
    return EXIT_OK


def cmd_oracle(args) -> int:
    if args.kind == "ww":
        if not args.demand:
            raise UsageError("--kind ww needs --demand")
        res = wagner_whitin_dp(args.demand, args.K, args.h)
        print(f"cost {float(res.cost)!r}")
        print(f"order periods {','.join(map(str, res.order_periods))}")
        print(f"quantities {','.join(f'{q:g}' for q in res.quantities)}")
        return EXIT_OK
    inst = _load(args)
    if args.kind == "tsp":
        res = held_karp_tsp(inst.dist)
        print(f"tour {'-'.join(map(str, res.order))} cost {float(res.cost)!r}")
        return EXIT_OK
    plan = brute_force_irp(inst)
    print(f"cost {float(plan.total_cost)!r}")
    for key, value in plan.breakdown.items():
        print(f"  {key} {float(value)!r}")
    for t, route in enumerate(plan.routes, 1):
        print(f"  period {t}: route {'-'.join(map(str, route))}")
    return EXIT_OK


def _close(a: float | None, b: float) -> bool:
    return a is not None and abs(a - b) <= REL_TOL * max(1.0, abs(b))


def verify_matrix(max_r: int, max_n: int, seeds: int, first_seed: int = 0,
                  time_limit: float = 60.0, lifted: bool = True, report=print) -> int:
    """Solve every formulation on a grid of small instances; returns mismatch count.

    Each random instance (``1 <= r <= max_r``, ``1 <= N <= max_n``) is checked
    against exhaustive enumeration for every inventory/routing pair, its
    node set as a standalone TSP against Held-Karp for every routing
    variant, and each retailer's series against the lot-sizing recursion.
    """
    config = SolverConfig(time_limit=time_limit)
    variants = [TspVariant(b) for b in TspBase]
    if lifted:
        variants += [TspVariant.parse(c) for c in BEKTAS_COLUMNS]
    specs = [FormulationSpec(inv, v) for inv in ("CMILP", "SP") for v in variants]
    bad = checks = 0
    for r in range(1, max_r + 1):
        for n_per in range(1, max_n + 1):
            for seed in range(first_seed, first_seed + seeds):
                inst = generate_random(seed, r, n_per)
                ref = brute_force_irp(inst).total_cost
                for spec in specs:
                    model, index = build_irp(inst, spec)
                    res = solve_mip(model, config, start=trivial_start(inst, spec, model, index))
                    checks += 1
                    if res.status != "optimal" or not _close(res.incumbent, ref):
                        bad += 1
                        report(f"MISMATCH {inst.name} {spec.name}: {res.status} "
                               f"{res.incumbent} vs oracle {ref}")
                if r >= 2:
                    tour = held_karp_tsp(inst.dist).cost
                    for v in variants:
                        res = solve_mip(build_tsp(inst.dist, v)[0], config)
                        checks += 1
                        if res.status != "optimal" or not _close(res.incumbent, tour):
                            bad += 1
                            report(f"MISMATCH {inst.name} TSP {v.name}: {res.incumbent} vs {tour}")
                for i in range(r):
                    d, K, h = inst.demand[:, i], inst.ordering[i], inst.holding[i]
                    ww = wagner_whitin_dp(d, K, h).cost
                    mip = solve_mip(build_wagner_whitin_milp(d, K, h)[0], config)
                    sp = solve_lp(build_wagner_whitin_sp(d, K, h)[0], time_limit=time_limit)
                    checks += 1
                    integral = sp.values is not None and bool(
                        np.all(np.minimum(np.abs(sp.values), np.abs(sp.values - 1)) <= 1e-6))
                    if not (_close(mip.incumbent, ww) and sp.status == "optimal"
                            and _close(sp.objective, ww) and integral):
                        bad += 1
                        report(f"MISMATCH {inst.name} lot sizing retailer {i + 1}")
                log.info("checked %s", inst.name)
    report(f"{checks} checks, {bad} mismatches")
    return bad


def cmd_verify(args) -> int:
    if min(args.max_r, args.max_n, args.seeds) < 1:
        raise UsageError("--max-r, --max-n and --seeds must be positive")
    bad = verify_matrix(args.max_r, args.max_n, args.seeds, args.seed, args.time_limit,
                        args.lifted)
    return EXIT_OK if bad == 0 else EXIT_FAIL


COMMANDS = {"gen": cmd_gen, "build": cmd_build, "solve": cmd_solve, "bench": cmd_bench,
            "oracle": cmd_oracle, "verify": cmd_verify}


def main(argv=None) -> int:
    try:
        args = _parse(argv)
    except UsageError as exc:
        print(f"irpbench: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:          # argparse already printed usage
        return int(exc.code or 0) and EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"irpbench: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (PlanError, OracleSizeError, ValueError, OSError) as exc:
        print(f"irpbench: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:           # solver or numerical failure
        log.debug("failure", exc_info=True)
        print(f"irpbench: failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
