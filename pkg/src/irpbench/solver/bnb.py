"""LP-based branch-and-bound for :class:`~irpbench.milp.Model`."""

from __future__ import annotations

import heapq
from collections import OrderedDict
import logging
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from ..milp import Model, check_feasible
from .simplex import INFEASIBLE, OPTIMAL, TIME_LIMIT, UNBOUNDED, LpNumericalError, LpProblem, LpSolution

__all__ = [
    "SolverConfig",
    "MipResult",
    "SolverError",
    "solve_lp",
    "solve_mip",
    "compute_gap",
    "lp_gap",
    "GAP_UNDEFINED",
]

log = logging.getLogger(__name__)

GAP_UNDEFINED = math.inf
FACTOR_CACHE_BYTES = 128 * 2**20


class SolverError(RuntimeError):
    """Raised when node LPs keep failing numerically after all retries."""


@dataclass(frozen=True)
class SolverConfig:
    time_limit: float = 3600.0
    feas_tol: float = 1e-6
    int_tol: float = 1e-6
    gap_tol: float = 1e-6
    node_limit: int | None = None
    branching: str = "most_fractional"      # or "first_fractional"
    node_selection: str = "best_bound"      # or "depth_first"
    refactor_every: int = 50
    max_retries: int = 2
    warm_start: bool = True
    reduced_cost_fixing: bool = True

    def __post_init__(self):
        for name in ("feas_tol", "int_tol", "gap_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.time_limit < 0:
            raise ValueError("time_limit must be nonnegative")
        if self.branching not in ("most_fractional", "first_fractional"):
            raise ValueError(f"unknown branching rule {self.branching!r}")
        if self.node_selection not in ("best_bound", "depth_first"):
            raise ValueError(f"unknown node selection {self.node_selection!r}")


@dataclass
class MipResult:
    status: str                       # optimal | time_limit | node_limit | infeasible | unbounded
    incumbent: float | None
    bound: float
    gap_percent: float
    nodes: int
    wall_seconds: float
    solution: np.ndarray | None = None
    trace: list[tuple[int, float, float]] = field(default_factory=list, repr=False)

    @property
    def objective(self) -> float | None:
        return self.incumbent


def compute_gap(incumbent: float | None, bound: float, tol: float = 1e-9) -> float:
    """Relative MIP gap in percent: ``100 * (incumbent - bound) / |incumbent|``.

    Returns 0 when the bound has reached the incumbent and ``inf`` when
    there is no incumbent (or the incumbent is 0 with a lower bound).
    """
    if incumbent is None or not math.isfinite(incumbent):
        return GAP_UNDEFINED
    if bound >= incumbent - tol:
        return 0.0
    if incumbent == 0:
        return GAP_UNDEFINED
    return 100.0 * (incumbent - bound) / abs(incumbent)


def solve_lp(model: Model, *, time_limit: float | None = None, bland: bool = False,
             refactor_every: int = 50) -> LpSolution:
    """Solve an all-continuous model; relax integer models first."""
    if model.integer_ids():
        raise ValueError("solve_lp needs a continuous model; use lp_relaxation() first")
    A, senses, b, c, lo, hi, _ = model.to_arrays()
    prob = LpProblem(A, senses, b, c)
    deadline = None if time_limit is None else time.perf_counter() + time_limit
    sol = prob.solve(lo, hi, deadline=deadline, bland=bland, refactor_every=refactor_every)
    if sol.status == OPTIMAL:
        sol.objective += model.obj_constant
    return sol


def lp_gap(model: Model, mip_optimum: float, lp: LpSolution | None = None) -> float:
    """Percent distance of the LP relaxation bound below a known MIP optimum."""
    from ..milp import lp_relaxation

    if lp is None:
        lp = solve_lp(lp_relaxation(model))
    if lp.status != OPTIMAL:
        raise ValueError(f"LP relaxation not solved to optimality: {lp.status}")
    if mip_optimum == 0:
        if abs(lp.objective) <= 1e-9:
            return 0.0
        raise ZeroDivisionError("LP gap undefined for a zero optimum with nonzero LP bound")
    return 100.0 * (mip_optimum - lp.objective) / mip_optimum


@dataclass(order=True)
class _Node:
    key: tuple
    bound: float = field(compare=False)
    lo: np.ndarray = field(compare=False, repr=False)
    hi: np.ndarray = field(compare=False, repr=False)
    depth: int = field(compare=False)
    branch_var: int = field(compare=False, default=-1)
    branch_val: float = field(compare=False, default=math.nan)
    warm: tuple | None = field(compare=False, default=None, repr=False)


class _BranchAndBound:
    def __init__(self, model: Model, config: SolverConfig, logger: Callable[[str], None] | None):
        self.model = model
        self.cfg = config
        A, senses, b, c, lo, hi, is_int = model.to_arrays()
        self.prob = LpProblem(A, senses, b, c)
        self.lo0 = lo.copy()
        self.hi0 = hi.copy()
        # integer bounds can be rounded inward up front
        self.lo0[is_int] = np.ceil(self.lo0[is_int] - config.int_tol)
        self.hi0[is_int] = np.floor(self.hi0[is_int] + config.int_tol)
        self.int_ids = np.flatnonzero(is_int)
        self.int_prio = np.array([model.priority.get(int(i), 0) for i in self.int_ids], dtype=np.int64)
        self.heuristic = None
        # basis inverses of open nodes, so expanding a node skips refactoring
        self.factors: OrderedDict[int, np.ndarray] = OrderedDict()
        self.factor_bytes = 0
        self.const = model.obj_constant
        self.emit = logger
        self.incumbent = math.inf
        self.solution: np.ndarray | None = None
        self.nodes = 0
        self.seq = 0
        self.trace: list[tuple[int, float, float]] = []
        self.open: list[_Node] = []

    # -- helpers --------------------------------------------------------
    def _lp(self, lo, hi, deadline, warm=None) -> LpSolution:
        if warm is not None and self.cfg.warm_start:
            try:
                return self.prob.solve(lo, hi, deadline=deadline, warm=warm,
                                       refactor_every=self.cfg.refactor_every)
            except LpNumericalError as exc:
                log.debug("warm start failed (%s); solving from scratch", exc)
        attempts = 0
        while True:
            try:
                return self.prob.solve(lo, hi, deadline=deadline, bland=attempts > 0,
                                       refactor_every=self.cfg.refactor_every if attempts == 0 else 10)
            except LpNumericalError as exc:
                attempts += 1
                log.warning("node LP numerical failure (%s); retry %d", exc, attempts)
                if attempts > self.cfg.max_retries:
                    raise SolverError(f"node LP failed after {attempts} attempts: {exc}") from exc

    def _fractional(self, x) -> tuple[int, float]:
        ids = self.int_ids
        if ids.size == 0:
            return -1, math.nan
        vals = x[ids]
        frac = np.abs(vals - np.round(vals))
        bad = frac > self.cfg.int_tol
        if not bad.any():
            return -1, math.nan
        if self.int_prio.size and self.int_prio.any():
            bad &= self.int_prio == self.int_prio[bad].max()
        if self.cfg.branching == "first_fractional":
            k = int(np.flatnonzero(bad)[0])
        else:
            dist = np.where(bad, np.minimum(vals - np.floor(vals), np.ceil(vals) - vals), -1.0)
            k = int(np.argmax(dist))       # first maximum = lowest column id
        return int(ids[k]), float(vals[k])

    def _cutoff(self) -> float:
        if not math.isfinite(self.incumbent):
            return math.inf
        return self.incumbent - self.cfg.gap_tol * max(abs(self.incumbent), 1e-9)

    def _push(self, node: _Node):
        if self.cfg.node_selection == "depth_first":
            node.key = (-node.depth, -self.seq)
        else:
            node.key = (node.bound, self.seq)
        self.seq += 1
        heapq.heappush(self.open, node)

    def _cache_factor(self, node: _Node, Binv: np.ndarray) -> None:
        self.factors[id(node)] = Binv
        self.factor_bytes += Binv.nbytes
        while self.factor_bytes > FACTOR_CACHE_BYTES and self.factors:
            _, old = self.factors.popitem(last=False)
            self.factor_bytes -= old.nbytes

    def _take_factor(self, node: _Node) -> np.ndarray | None:
        Binv = self.factors.pop(id(node), None)
        if Binv is not None:
            self.factor_bytes -= Binv.nbytes
        return Binv

    def global_bound(self) -> float:
        if not self.open:
            return self.incumbent
        if self.cfg.node_selection == "best_bound":
            lowest = self.open[0].bound
        else:
            lowest = min(n.bound for n in self.open)
        return min(lowest, self.incumbent)

    def _record(self):
        b = self.global_bound()
        self.trace.append((self.nodes, b + self.const, self.incumbent + self.const))
        if self.emit:
            self.emit(f"node {self.nodes} bound {b + self.const:.6f} "
                      f"incumbent {self.incumbent + self.const:.6f} open {len(self.open)}")

    def _fix_by_reduced_cost(self, sol: LpSolution, lo, hi):
        """Fix integer columns whose reduced cost alone exceeds the incumbent gap."""
        if not self.cfg.reduced_cost_fixing or sol.reduced_costs is None:
            return lo, hi
        room = self._cutoff() - sol.objective
        if not math.isfinite(room):
            return lo, hi
        ids = self.int_ids
        d = sol.reduced_costs[ids]
        x = sol.values[ids]
        tol = self.cfg.int_tol
        up = (d > room + 1e-9) & (x <= lo[ids] + tol) & (hi[ids] > lo[ids])
        down = (-d > room + 1e-9) & (x >= hi[ids] - tol) & (hi[ids] > lo[ids])
        if not (up.any() or down.any()):
            return lo, hi
        lo, hi = lo.copy(), hi.copy()
        hi[ids[up]] = lo[ids[up]]
        lo[ids[down]] = hi[ids[down]]
        return lo, hi

    def _try_heuristic(self, values) -> None:
        if self.heuristic is None:
            return
        cand = self.heuristic(values)
        if cand is None:
            return
        cand = np.asarray(cand, dtype=float)
        obj = float(self.prob.c @ cand)
        if obj < self.incumbent and not check_feasible(self.model, cand, self.cfg.feas_tol):
            self._accept(obj, cand)

    def _accept(self, objective: float, values: np.ndarray) -> None:
        if objective < self.incumbent:
            self.incumbent = objective
            self.solution = values.copy()
            cut = self._cutoff()
            for n in self.open:
                if n.bound >= cut:
                    self._take_factor(n)
            self.open = [n for n in self.open if n.bound < cut]
            heapq.heapify(self.open)

    def _evaluate(self, lo, hi, depth, parent_bound, deadline, warm=None) -> str:
        """Solve a node LP and file it; returns the LP status."""
        sol = self._lp(lo, hi, deadline, warm)
        self.nodes += 1
        if sol.status == TIME_LIMIT:
            self._push(_Node((), parent_bound, lo, hi, depth, warm=warm))
            return TIME_LIMIT
        if sol.status == INFEASIBLE:
            return INFEASIBLE
        if sol.status == UNBOUNDED:
            return UNBOUNDED
        bound = max(sol.objective, parent_bound)
        if bound >= self._cutoff():
            return OPTIMAL
        j, v = self._fractional(sol.values)
        if j < 0:
            self._accept(sol.objective, sol.values)
        else:
            self._try_heuristic(sol.values)
            lo, hi = self._fix_by_reduced_cost(sol, lo, hi)
            node = _Node((), bound, lo, hi, depth, j, v, sol.warm)
            self._push(node)
            if sol.basis_inverse is not None and sol.warm is not None:
                self._cache_factor(node, sol.basis_inverse)
        return OPTIMAL

    # -- driver ---------------------------------------------------------
    def run(self, start: np.ndarray | None) -> MipResult:
        t0 = time.perf_counter()
        deadline = t0 + self.cfg.time_limit
        if start is not None:
            self.incumbent = float(self.model.objective_value(start)) - self.const
            self.solution = np.asarray(start, dtype=float).copy()
        # The root LP always runs to completion so a finite bound exists.
        status = self._evaluate(self.lo0.copy(), self.hi0.copy(), 0, -math.inf, None)
        if status == UNBOUNDED:
            return self._finish("unbounded", t0, -math.inf)
        if status == INFEASIBLE and self.solution is None:
            return self._finish("infeasible", t0, math.inf)
        self._record()
        stop = None
        while self.open:
            cut = self._cutoff()
            if self.global_bound() >= cut:
                break
            if time.perf_counter() > deadline:
                stop = "time_limit"
                break
            if self.cfg.node_limit is not None and self.nodes >= self.cfg.node_limit:
                stop = "node_limit"
                break
            node = heapq.heappop(self.open)
            Binv = self._take_factor(node)
            if node.bound >= cut:
                continue
            if node.branch_var < 0:        # unsolved node left by an interrupted LP
                if self._evaluate(node.lo, node.hi, node.depth, node.bound, deadline,
                                  node.warm) == TIME_LIMIT:
                    stop = "time_limit"
                    break
                self._record()
                continue
            j, v = node.branch_var, node.branch_val
            down_hi = node.hi.copy()
            down_hi[j] = math.floor(v)
            up_lo = node.lo.copy()
            up_lo[j] = math.ceil(v)
            children = [(node.lo, down_hi), (up_lo, node.hi)]
            warm = node.warm
            if warm is not None and self.cfg.warm_start:
                warm = (warm[0], warm[1], Binv) if Binv is not None else self.prob.factor(warm)
            if self.cfg.node_selection == "depth_first" and v - math.floor(v) >= 0.5:
                children.reverse()         # nearer branch is popped first
            timed_out = False
            for lo, hi in children:
                if timed_out:
                    self._push(_Node((), node.bound, lo, hi, node.depth + 1, warm=node.warm))
                    continue
                if self._evaluate(lo, hi, node.depth + 1, node.bound, deadline,
                                  warm) == TIME_LIMIT:
                    timed_out = True
            self._record()
            if timed_out:
                stop = "time_limit"
                break
        bound = self.global_bound()
        if stop is None:
            if self.solution is None:
                return self._finish("infeasible", t0, math.inf)
            return self._finish("optimal", t0, bound)
        return self._finish(stop, t0, bound)

    def _finish(self, status, t0, bound) -> MipResult:
        inc = None if self.solution is None else self.incumbent + self.const
        b = bound + self.const if math.isfinite(bound) else bound
        if inc is not None and status == "optimal":
            b = min(b, inc)
        gap = compute_gap(inc, b) if inc is not None else GAP_UNDEFINED
        if status == "optimal":
            gap = 0.0 if gap <= 100 * self.cfg.gap_tol else gap
        return MipResult(status, inc, b, gap, self.nodes, time.perf_counter() - t0,
                         self.solution, self.trace)


def solve_mip(model: Model, config: SolverConfig | None = None, *,
              start: Sequence[float] | Mapping | None = None,
              logger: Callable[[str], None] | None = None,
              heuristic: Callable[[np.ndarray], np.ndarray | None] | None = None) -> MipResult:
    """Branch-and-bound over LP relaxations.

    ``start`` is an optional feasible assignment used as the first incumbent
    (it is checked and ignored with a warning if infeasible).  ``logger``
    receives one trace line per processed node.  ``heuristic`` maps a
    fractional node solution to a candidate assignment (or ``None``); a
    candidate becomes the incumbent only if it is feasible and improving.
    Fractional columns with a higher ``model.priority`` are branched first.
    """
    cfg = config or SolverConfig()
    bb = _BranchAndBound(model, cfg, logger)
    bb.heuristic = heuristic
    start_vec = None
    if start is not None:
        viol = check_feasible(model, start, cfg.feas_tol)
        if viol:
            log.warning("ignoring infeasible start solution (%d violations)", len(viol))
        else:
            start_vec = np.array([float(start[i]) if not isinstance(start, Mapping) else
                                  float(start[i] if i in start else start[model.vars[i].name])
                                  for i in range(model.num_vars)])
    return bb.run(start_vec)
