"""Experiment plans, result rows and CSV output."""

from __future__ import annotations

import csv
import io
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Sequence

from ..formulations import FormulationSpec, build_irp, rounding_heuristic, trivial_start
from ..instance import (DemandPattern, IrpInstance, PatternKind, default_pattern, generate_design1,
                        generate_design2, generate_pattern, generate_random, load_instance)
from ..milp import lp_relaxation
from ..solver import SolverConfig, solve_lp, solve_mip

__all__ = [
    "ExperimentPlan",
    "ResultRow",
    "PlanError",
    "CSV_HEADER",
    "AGG_HEADER",
    "run_plan",
    "write_rows",
    "aggregate_rows",
    "emit_pattern_data",
    "DESK_MAX_RETAILERS",
    "DESK_MAX_PERIODS",
]

CSV_HEADER = ("instance", "formulation", "mode", "time_sec", "gap_pct", "best", "status")
AGG_HEADER = ("mode", "formulation", "N", "r", "count", "time_sec", "gap_pct", "best")
MODES = ("MIP", "LP")
SOURCES = ("design1", "design2", "random", "files")
DESK_MAX_RETAILERS = 10
DESK_MAX_PERIODS = 6


class PlanError(ValueError):
    """Invalid experiment plan."""


@dataclass(frozen=True)
class ExperimentPlan:
    """What to run.

    ``source`` picks the instance family: ``design1`` and ``random`` use the
    ``periods`` x ``retailers`` grid, ``design2`` uses ``scenarios`` (shrunk
    to ``d2_retailers`` x ``d2_periods`` when set) and ``files`` reads
    ``files``.  Each generated cell is repeated once per seed.  With
    ``timing`` off the time column is written as ``NA`` so that repeated
    runs give identical files.
    """

    formulations: tuple[str, ...]
    source: str = "random"
    periods: tuple[int, ...] = (3,)
    retailers: tuple[int, ...] = (5,)
    scenarios: tuple[int, ...] = ()
    d2_retailers: int | None = None
    d2_periods: int | None = None
    files: tuple[str, ...] = ()
    seeds: tuple[int, ...] = (0, 1, 2, 3, 4)
    modes: tuple[str, ...] = ("MIP",)
    config: SolverConfig = field(default_factory=lambda: SolverConfig(time_limit=60.0))
    out_dir: str = "results"
    timing: bool = True
    use_start: bool = True
    workers: int = 1
    full_scale: bool = False

    def __post_init__(self):
        for name in ("formulations", "periods", "retailers", "scenarios", "files", "seeds", "modes"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        self.validate()

    def validate(self) -> None:
        if not self.formulations:
            raise PlanError("formulation list is empty")
        for name in self.formulations:
            try:
                FormulationSpec.parse(name)
            except ValueError as exc:
                raise PlanError(f"unknown formulation {name!r}: {exc}") from None
        if self.source not in SOURCES:
            raise PlanError(f"source must be one of {SOURCES}, got {self.source!r}")
        if not self.modes or any(m not in MODES for m in self.modes):
            raise PlanError(f"modes must be a nonempty subset of {MODES}")
        if len(set(self.seeds)) != len(self.seeds) or not self.seeds:
            raise PlanError("seeds must be nonempty and distinct")
        if self.workers < 1:
            raise PlanError("workers must be >= 1")
        if self.source == "files":
            if not self.files:
                raise PlanError("source 'files' needs at least one file")
        elif self.source == "design2":
            if not self.scenarios or any(not 1 <= s <= 18 for s in self.scenarios):
                raise PlanError("design2 needs scenario ids in 1..18")
        elif not self.periods or not self.retailers:
            raise PlanError("periods and retailers grids must be nonempty")
        if not self.full_scale and self.source != "files":
            if self.source == "design2":
                r_max, n_max = self.d2_retailers or 16, self.d2_periods or 15
            else:
                r_max, n_max = max(self.retailers), max(self.periods)
            if r_max > DESK_MAX_RETAILERS or n_max > DESK_MAX_PERIODS:
                raise PlanError(f"desk-scale plans allow r <= {DESK_MAX_RETAILERS} and "
                                f"N <= {DESK_MAX_PERIODS}; set full_scale (--full-scale true) to go beyond")

    def instances(self) -> Iterator[IrpInstance]:
        """Instances in plan order."""
        if self.source == "files":
            for path in self.files:
                yield load_instance(path)
        elif self.source == "design2":
            for sid in self.scenarios:
                for seed in self.seeds:
                    kw = {}
                    if self.d2_retailers is not None:
                        kw["retailers"] = self.d2_retailers
                    if self.d2_periods is not None:
                        kw["periods"] = self.d2_periods
                    inst = generate_design2(sid, seed, **kw)
                    yield replace_name(inst, f"{inst.name}-seed{seed}")
        else:
            gen = generate_design1 if self.source == "design1" else _random
            for n_per in self.periods:
                for r in self.retailers:
                    for seed in self.seeds:
                        yield gen(seed, n_per, r)


def _random(seed: int, periods: int, retailers: int) -> IrpInstance:
    return generate_random(seed, retailers, periods)


def replace_name(inst: IrpInstance, name: str) -> IrpInstance:
    return IrpInstance(name=name, demand=inst.demand, holding=inst.holding,
                       ordering=inst.ordering, dispatch=inst.dispatch, dist=inst.dist,
                       coords=inst.coords)


@dataclass(frozen=True)
class ResultRow:
    instance: str
    formulation: str
    mode: str
    time_sec: float | None
    gap_pct: float | None
    best: float | None
    status: str
    periods: int = 0
    retailers: int = 0

    def cells(self) -> list[str]:
        return [self.instance, self.formulation, self.mode, _cell(self.time_sec, 3),
                _cell(self.gap_pct, 6), _cell(self.best, 6), self.status]


def _cell(x: float | None, digits: int) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return "NA"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.{digits}f}"


def _solve_one(inst: IrpInstance, name: str, mode: str, config: SolverConfig,
               use_start: bool) -> tuple[float, float | None, float | None, str]:
    """Returns ``(seconds, value, gap, status)``; the LP gap is filled in later."""
    spec = FormulationSpec.parse(name)
    t0 = time.perf_counter()
    try:
        model, index = build_irp(inst, spec)
        if mode == "LP":
            sol = solve_lp(lp_relaxation(model), time_limit=config.time_limit)
            value = sol.objective if sol.status == "optimal" else None
            return time.perf_counter() - t0, value, None, sol.status
        start = trivial_start(inst, spec, model, index) if use_start else None
        res = solve_mip(model, config, start=start,
                        heuristic=rounding_heuristic(inst, spec, model, index))
        return time.perf_counter() - t0, res.incumbent, res.gap_percent, res.status
    except Exception as exc:          # recorded per row; the bench keeps going
        return time.perf_counter() - t0, None, None, f"error:{type(exc).__name__}"


def _task(args):
    return _solve_one(*args)


def run_plan(plan: ExperimentPlan, out_dir: str | Path | None = None) -> dict[str, Path]:
    """Run every (instance, formulation, mode) and write the CSV files.

    Writes ``results_mip.csv`` / ``results_lp.csv`` (one per requested mode)
    and ``aggregate.csv``.  LP rows report the gap of the relaxation below
    the best MIP value found for the same instance in this plan (``NA``
    without a MIP row).  Returns the written paths keyed by file stem.
    """
    out = Path(out_dir if out_dir is not None else plan.out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise PlanError(f"cannot create output directory {out}: {exc}") from exc
    instances = list(plan.instances())
    tasks = [(inst, name, mode, plan.config, plan.use_start)
             for mode in ("MIP", "LP") if mode in plan.modes
             for inst in instances for name in plan.formulations]
    if plan.workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=plan.workers) as pool:
            outcomes = list(pool.map(_task, tasks))
    else:
        outcomes = [_task(t) for t in tasks]

    best_mip: dict[str, float] = {}
    for (inst, _, mode, _, _), (_, value, _, _) in zip(tasks, outcomes):
        if mode == "MIP" and value is not None:
            best_mip[inst.name] = min(value, best_mip.get(inst.name, math.inf))
    rows: list[ResultRow] = []
    for (inst, name, mode, _, _), (secs, value, gap, status) in zip(tasks, outcomes):
        if mode == "LP" and value is not None and inst.name in best_mip:
            ref = best_mip[inst.name]
            gap = 0.0 if ref == 0 and abs(value) <= 1e-9 else \
                (100.0 * (ref - value) / ref if ref else None)
        spec = FormulationSpec.parse(name)
        rows.append(ResultRow(inst.name, spec.name, mode, secs if plan.timing else None,
                              gap, value, status, inst.num_periods, inst.num_retailers))
    paths = {}
    for mode in plan.modes:
        path = out / f"results_{mode.lower()}.csv"
        write_rows([r for r in rows if r.mode == mode], path)
        paths[path.stem] = path
    agg = out / "aggregate.csv"
    agg.write_text(_format_aggregate(aggregate_rows(rows)), encoding="utf-8", newline="")
    paths[agg.stem] = agg
    return paths


def format_rows(rows: Sequence[ResultRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow(r.cells())
    return buf.getvalue()


def write_rows(rows: Sequence[ResultRow], path: str | Path) -> Path:
    path = Path(path)
    path.write_text(format_rows(rows), encoding="utf-8", newline="")
    return path


def _mean(values: list[float | None]) -> float | None:
    vals = [v for v in values if v is not None]
    if len(vals) != len(values) or not vals:
        return None
    return math.fsum(vals) / len(vals)


def aggregate_rows(rows: Sequence[ResultRow]) -> list[dict]:
    """Means per (mode, formulation, N, r), in first-appearance order."""
    groups: dict[tuple, list[ResultRow]] = {}
    for r in rows:
        groups.setdefault((r.mode, r.formulation, r.periods, r.retailers), []).append(r)
    out = []
    for (mode, form, n_per, r), members in groups.items():
        out.append({"mode": mode, "formulation": form, "N": n_per, "r": r, "count": len(members),
                    "time_sec": _mean([m.time_sec for m in members]),
                    "gap_pct": _mean([m.gap_pct for m in members]),
                    "best": _mean([m.best for m in members])})
    return out


def _format_aggregate(groups: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(AGG_HEADER)
    for g in groups:
        w.writerow([g["mode"], g["formulation"], g["N"], g["r"], g["count"],
                    _cell(g["time_sec"], 3), _cell(g["gap_pct"], 6), _cell(g["best"], 6)])
    return buf.getvalue()


def emit_pattern_data(patterns: Sequence[DemandPattern | PatternKind | str], periods: int,
                      path: str | Path) -> Path:
    """Write one demand column per pattern (``N`` rows) as CSV."""
    pats = [p if isinstance(p, DemandPattern) else default_pattern(p) for p in patterns]
    if not pats:
        raise ValueError("need at least one pattern")
    cols = [generate_pattern(p, periods) for p in pats]
    names, seen = [], {}
    for p in pats:
        k = p.kind.value
        seen[k] = seen.get(k, 0) + 1
        names.append(k if seen[k] == 1 else f"{k}_{seen[k]}")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["period"] + names)
    for t in range(periods):
        w.writerow([t + 1] + [_cell(float(c[t]), 0) if float(c[t]).is_integer()
                              else repr(float(c[t])) for c in cols])
    path = Path(path)
    path.write_text(buf.getvalue(), encoding="utf-8", newline="")
    return path
