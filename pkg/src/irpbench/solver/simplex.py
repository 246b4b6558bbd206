"""Bounded-variable revised simplex on dense arrays.

Every row gets a slack column (``A x + s = b``) whose bounds encode the row
sense, so the problem handed to the pivoting code is

    min c'x   s.t.  [A I] (x, s) = b,   lo <= (x, s) <= hi.

Phase 1 adds an artificial column for each row the slack basis cannot
satisfy and minimises their sum; phase 2 continues from the phase-1 basis
with the artificials fixed at zero.  The basis inverse is kept explicitly,
updated by elementary row operations and recomputed from scratch every
``refactor_every`` pivots.

Pricing is Dantzig's largest reduced cost with a Harris two-pass ratio test.
If the objective stalls for ``stall_limit`` pivots the solver switches to
Bland's smallest-index rule (which cannot cycle) until progress resumes.

A solve may instead start from a previous optimal basis (``warm``).  Only
bounds differ between branch-and-bound nodes, so that basis stays dual
feasible and a bounded dual simplex restores primal feasibility, followed by
a primal pass that mops up any tolerance-level dual infeasibility.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

__all__ = ["LpSolution", "LpNumericalError", "LpProblem", "solve_lp_arrays"]

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
TIME_LIMIT = "time_limit"


class LpNumericalError(ArithmeticError):
    """The simplex could not keep a usable basis (singular or drifting)."""


@dataclass
class LpSolution:
    status: str
    objective: float
    values: np.ndarray
    iterations: int
    duals: np.ndarray | None = None
    reduced_costs: np.ndarray | None = None
    basis: np.ndarray | None = field(default=None, repr=False)
    at_upper: np.ndarray | None = field(default=None, repr=False)
    basis_inverse: np.ndarray | None = field(default=None, repr=False, compare=False)

    @property
    def warm(self) -> tuple[np.ndarray, np.ndarray] | None:
        """Basis handle for :meth:`LpProblem.solve`, or ``None`` if unusable."""
        if self.status != OPTIMAL or self.basis is None or self.at_upper is None:
            return None
        return self.basis, self.at_upper


class LpProblem:
    """Row data shared by many solves that differ only in column bounds.

    Branch-and-bound builds one of these per model and calls :meth:`solve`
    with the node's bounds.
    """

    def __init__(self, A, senses, b, c):
        A = np.asarray(A, dtype=float)
        self.m, self.n = A.shape
        m = self.m
        self.b = np.asarray(b, dtype=float).copy()
        self.c = np.asarray(c, dtype=float).copy()
        self.A_full = np.hstack([A, np.eye(m)]) if m else A.copy()
        slack_lo = np.zeros(m)
        slack_hi = np.zeros(m)
        senses = np.asarray(senses)
        slack_hi[senses == "<="] = math.inf
        slack_lo[senses == ">="] = -math.inf
        self.slack_lo = slack_lo
        self.slack_hi = slack_hi

    def solve(self, lo, hi, *, deadline: float | None = None, bland: bool = False,
              refactor_every: int = 50, stall_limit: int | None = None,
              feas_tol: float = 1e-9, opt_tol: float = 1e-9,
              max_iter: int | None = None,
              warm: tuple[np.ndarray, np.ndarray] | None = None) -> LpSolution:
        """Minimise over ``lo <= x <= hi``.

        ``warm`` is the :attr:`LpSolution.warm` handle of an earlier solve of
        this problem; it is ignored if it references phase-1 columns.
        """
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        m, n = self.m, self.n
        if np.any(lo > hi + feas_tol):
            return LpSolution(INFEASIBLE, math.inf, np.full(n, math.nan), 0)
        if m == 0:
            return self._solve_unconstrained(lo, hi)
        if warm is not None and np.any(warm[0] >= n + m):
            warm = None
        if warm is not None and len(warm) > 2 and warm[2] is not None:
            warm = (warm[0], warm[1], warm[2].copy())
        opts = dict(deadline=deadline, bland=bland, refactor_every=refactor_every,
                    feas_tol=feas_tol, opt_tol=opt_tol,
                    stall_limit=stall_limit if stall_limit is not None else max(50, m),
                    max_iter=max_iter if max_iter is not None else 50 * (m + n) + 1000)
        if warm is None and not bland:
            # Slack basis with every column at its cheaper bound is dual
            # feasible whenever that bound is finite; the dual simplex copes
            # far better with the primal degeneracy of routing models.
            start = self._slack_start(lo, hi)
            if start is not None:
                try:
                    return _Run(self, lo, hi, warm=start, **opts).execute()
                except LpNumericalError:
                    pass
        return _Run(self, lo, hi, warm=warm, **opts).execute()

    def factor(self, warm) -> tuple:
        """``warm`` plus the inverse of its basis, for reuse by several solves."""
        basis, at_upper = warm[0], warm[1]
        if np.any(basis >= self.n + self.m):
            return warm
        run = _Run.__new__(_Run)
        run.p, run.A, run.basis = self, self.A_full, np.asarray(basis)
        try:
            return basis, at_upper, run._basis_inverse()
        except np.linalg.LinAlgError:
            return basis, at_upper

    def _slack_start(self, lo, hi):
        c = self.c
        if np.any((c > 0) & ~np.isfinite(lo)) or np.any((c < 0) & ~np.isfinite(hi)):
            return None
        at_upper = np.concatenate([(c < 0) | ((c == 0) & ~np.isfinite(lo)), np.zeros(self.m, bool)])
        return np.arange(self.n, self.n + self.m), at_upper

    def _solve_unconstrained(self, lo, hi) -> LpSolution:
        c = self.c
        x = np.where(c > 0, lo, np.where(c < 0, hi, np.where(np.isfinite(lo), lo,
                                                            np.where(np.isfinite(hi), hi, 0.0))))
        if not np.all(np.isfinite(x)):
            return LpSolution(UNBOUNDED, -math.inf, x, 0)
        return LpSolution(OPTIMAL, float(c @ x), x, 0, np.zeros(0), c.copy())


class _Run:
    """State of one simplex solve (both phases)."""

    def __init__(self, prob: LpProblem, lo, hi, *, warm=None, deadline, bland, refactor_every,
                 feas_tol, opt_tol, stall_limit, max_iter):
        self.p = prob
        self.deadline = deadline
        self.force_bland = bland
        self.refactor_every = max(1, refactor_every)
        self.ftol = feas_tol
        self.otol = opt_tol
        self.stall_limit = stall_limit
        self.max_iter = max_iter
        self.iterations = 0

        m, n = prob.m, prob.n
        lo_all = np.concatenate([lo, prob.slack_lo])
        hi_all = np.concatenate([hi, prob.slack_hi])
        self.warm = warm is not None
        if self.warm:
            self._init_warm(lo_all, hi_all, *warm)
            return
        # Nonbasic structurals start at a finite bound (0 if free).
        x = np.where(np.isfinite(lo_all), lo_all, np.where(np.isfinite(hi_all), hi_all, 0.0))
        x[n:] = 0.0
        resid = prob.b - prob.A_full[:, :n] @ x[:n]
        s_lo, s_hi = prob.slack_lo, prob.slack_hi
        ok = (resid >= s_lo - feas_tol) & (resid <= s_hi + feas_tol)
        need = np.flatnonzero(~ok)
        basis = np.arange(n, n + m)
        x[n:] = np.where(ok, resid, np.clip(resid, s_lo, s_hi))
        art_cols = np.zeros((m, len(need)))
        for k, row in enumerate(need):
            gap = resid[row] - x[n + row]
            art_cols[row, k] = 1.0 if gap > 0 else -1.0
            basis[row] = n + m + k
        self.A = np.hstack([prob.A_full, art_cols]) if len(need) else prob.A_full
        self.n_art = len(need)
        self.lo = np.concatenate([lo_all, np.zeros(len(need))])
        self.hi = np.concatenate([hi_all, np.full(len(need), math.inf)])
        art_vals = np.abs(resid[need] - x[n + need]) if len(need) else np.zeros(0)
        self.x = np.concatenate([x, art_vals])
        self.basis = basis
        self.is_basic = np.zeros(self.A.shape[1], dtype=bool)
        self.is_basic[basis] = True
        self.Binv = None
        self.since_refactor = 0

    def _init_warm(self, lo_all, hi_all, basis, at_upper, Binv=None):
        self.A = self.p.A_full
        self.n_art = 0
        self.lo, self.hi = lo_all, hi_all
        up = np.asarray(at_upper, dtype=bool) & np.isfinite(hi_all)
        x = np.where(up, hi_all, np.where(np.isfinite(lo_all), lo_all,
                                          np.where(np.isfinite(hi_all), hi_all, 0.0)))
        self.x = x
        self.basis = np.array(basis, dtype=np.int64)
        self.is_basic = np.zeros(self.A.shape[1], dtype=bool)
        self.is_basic[self.basis] = True
        self.Binv = Binv
        self.since_refactor = 0

    # -- linear algebra -------------------------------------------------
    def refactor(self, reuse: bool = False):
        if not (reuse and self.Binv is not None):
            try:
                self.Binv = self._basis_inverse()
            except np.linalg.LinAlgError as exc:
                raise LpNumericalError("singular basis") from exc
        nb = ~self.is_basic
        rhs = self.p.b - self.A[:, nb] @ self.x[nb]
        self.x[self.basis] = self.Binv @ rhs
        if not np.all(np.isfinite(self.x)):
            raise LpNumericalError("non-finite basic solution after refactorization")
        self.since_refactor = 0

    def _basis_inverse(self) -> np.ndarray:
        """Inverse of the basis matrix, exploiting basic slack columns.

        With ``k`` structural columns basic, only the ``k x k`` block on the
        rows whose slacks are nonbasic needs a dense inverse.
        """
        n, m = self.p.n, self.p.m
        basis = self.basis
        if np.any(basis >= n + m):
            return np.linalg.inv(self.A[:, basis])
        is_struct = basis < n
        struct_pos = np.flatnonzero(is_struct)
        slack_pos = np.flatnonzero(~is_struct)
        slack_rows = basis[slack_pos] - n
        free_rows = np.setdiff1d(np.arange(m), slack_rows)
        if len(free_rows) != len(struct_pos):
            raise np.linalg.LinAlgError("basis repeats a slack column")
        cols = basis[struct_pos]
        Binv = np.zeros((m, m))
        if len(cols):
            Minv = np.linalg.inv(self.A[np.ix_(free_rows, cols)])
            Binv[np.ix_(struct_pos, free_rows)] = Minv
            Binv[np.ix_(slack_pos, free_rows)] = -self.A[np.ix_(slack_rows, cols)] @ Minv
        Binv[slack_pos, slack_rows] += 1.0
        return Binv

    # -- main loop ------------------------------------------------------
    def execute(self) -> LpSolution:
        p = self.p
        total = self.A.shape[1]
        self.refactor(reuse=True)
        if self.warm:
            cost = np.zeros(total)
            cost[:p.n] = p.c
            status = self.dual_iterate(cost)
            if status != OPTIMAL:
                return self._result(status, None)
            return self._result(self.iterate(cost, phase=2), cost)
        if self.n_art:
            cost = np.zeros(total)
            cost[p.n + p.m:] = 1.0
            status = self.iterate(cost, phase=1)
            if status == TIME_LIMIT:
                return self._result(TIME_LIMIT, None)
            infeas = float(self.x[p.n + p.m:].sum())
            if infeas > self.ftol * max(1.0, float(np.abs(p.b).max(initial=0.0))):
                return self._result(INFEASIBLE, None)
            self.hi[p.n + p.m:] = 0.0
            self.x[p.n + p.m:] = np.clip(self.x[p.n + p.m:], 0.0, 0.0)
            self.refactor()
        cost = np.zeros(total)
        cost[:p.n] = p.c
        status = self.iterate(cost, phase=2)
        return self._result(status, cost)

    def iterate(self, cost, phase) -> str:
        A, lo, hi, x = self.A, self.lo, self.hi, self.x
        ftol, otol = self.ftol, self.otol
        best_obj = math.inf
        stall = 0
        bland = self.force_bland
        movable = lo < hi
        while True:
            if self.deadline is not None and time.perf_counter() > self.deadline:
                return TIME_LIMIT
            if self.iterations >= self.max_iter:
                raise LpNumericalError(f"iteration limit {self.max_iter} reached in phase {phase}")
            if self.since_refactor >= self.refactor_every:
                self.refactor()
            basis = self.basis
            Binv = self.Binv
            y = cost[basis] @ Binv
            d = cost - y @ A
            at_hi = x >= hi - ftol
            at_lo = x <= lo + ftol
            cand = (~self.is_basic) & movable & (((d < -otol) & ~at_hi) | ((d > otol) & ~at_lo))
            idx = np.flatnonzero(cand)
            if idx.size == 0:
                return OPTIMAL
            if bland:
                q = int(idx[0])
            else:
                q = int(idx[np.argmax(np.abs(d[idx]))])
            direction = 1.0 if d[q] < 0 else -1.0
            alpha = Binv @ A[:, q]
            delta = -direction * alpha          # rate of change of x_B per unit step
            xb = x[basis]
            lob, hib = lo[basis], hi[basis]
            ptol = 1e-9 * max(1.0, float(np.abs(alpha).max(initial=0.0)))
            dec = delta < -ptol
            inc = delta > ptol
            flip = hi[q] - lo[q]
            if not (dec.any() or inc.any()):
                if math.isinf(flip):
                    if phase == 1:
                        raise LpNumericalError("unbounded phase-1 direction")
                    return UNBOUNDED
                self._bound_flip(q, direction, flip, delta)
                continue
            ratios = np.full(len(basis), math.inf)
            with np.errstate(divide="ignore", invalid="ignore"):
                ratios[dec] = (xb[dec] - lob[dec]) / -delta[dec]
                ratios[inc] = (hib[inc] - xb[inc]) / delta[inc]
            ratios = np.maximum(ratios, 0.0)
            if bland:
                theta = float(ratios.min())
                if math.isinf(theta) and math.isinf(flip):
                    return UNBOUNDED
                if flip <= theta:
                    self._bound_flip(q, direction, flip, delta)
                    continue
                ties = np.flatnonzero(ratios <= theta + 1e-12)
                r = int(ties[np.argmin(basis[ties])])
            else:
                relaxed = np.full(len(basis), math.inf)
                with np.errstate(divide="ignore", invalid="ignore"):
                    relaxed[dec] = (xb[dec] - lob[dec] + ftol) / -delta[dec]
                    relaxed[inc] = (hib[inc] - xb[inc] + ftol) / delta[inc]
                theta_max = float(np.maximum(relaxed, 0.0).min())
                if math.isinf(theta_max) and math.isinf(flip):
                    return UNBOUNDED
                if flip <= theta_max and flip <= float(ratios.min()) + ftol:
                    self._bound_flip(q, direction, flip, delta)
                    continue
                ok = np.flatnonzero(ratios <= theta_max)
                r = int(ok[np.argmax(np.abs(delta[ok]))])
                theta = float(ratios[r])
            if math.isinf(theta):
                return UNBOUNDED
            self._pivot(q, r, direction, theta, delta, alpha)
            obj = float(cost @ x)
            if obj < best_obj - 1e-12 * max(1.0, abs(best_obj) if math.isfinite(best_obj) else 1.0):
                best_obj = obj
                stall = 0
                bland = self.force_bland
            else:
                stall += 1
                if stall >= self.stall_limit:
                    bland = True

    def dual_iterate(self, cost) -> str:
        """Bounded dual simplex; returns OPTIMAL once the basis is primal feasible."""
        A, lo, hi, x = self.A, self.lo, self.hi, self.x
        ftol, otol = self.ftol, self.otol
        movable = lo < hi
        d = None
        while True:
            if self.deadline is not None and time.perf_counter() > self.deadline:
                return TIME_LIMIT
            if self.iterations >= self.max_iter:
                raise LpNumericalError(f"iteration limit {self.max_iter} reached in dual simplex")
            if self.since_refactor >= self.refactor_every:
                self.refactor()
            basis, Binv = self.basis, self.Binv
            if d is None or self.since_refactor == 0:
                d = cost - (cost[basis] @ Binv) @ A
            xb = x[basis]
            below = lo[basis] - xb
            above = xb - hi[basis]
            viol = np.maximum(below, above)
            r = int(np.argmax(viol))
            if viol[r] <= ftol:
                return OPTIMAL
            raise_it = below[r] > above[r]          # leaving variable must increase
            target = lo[basis[r]] if raise_it else hi[basis[r]]
            rho = Binv[r]
            row = rho @ A
            at_hi = x >= hi - ftol
            at_lo = x <= lo + ftol
            free = ~at_hi & ~at_lo
            nb = ~self.is_basic & movable
            # x_B[r] changes by -row[j] per unit increase of x_j
            sgn = 1.0 if raise_it else -1.0
            can_up = nb & ~at_hi & (sgn * row < -1e-9)
            can_down = nb & ~at_lo & (sgn * row > 1e-9)
            elig = can_up | can_down
            if not elig.any():
                return INFEASIBLE
            idx = np.flatnonzero(elig)
            dj = d[idx]
            # dual feasibility: d >= 0 for moving up, d <= 0 for moving down
            slackd = np.where(can_up[idx], np.maximum(dj, 0.0), np.maximum(-dj, 0.0))
            slackd[free[idx]] = np.abs(dj[free[idx]])
            ratios = slackd / np.abs(row[idx])
            relaxed = (slackd + otol) / np.abs(row[idx])
            cap = float(relaxed.min())
            ok = np.flatnonzero(ratios <= cap)
            q = int(idx[ok[np.argmax(np.abs(row[idx[ok]]))]])
            alpha = Binv @ A[:, q]
            if abs(alpha[r]) < 1e-9:
                raise LpNumericalError("dual pivot element too small")
            step = (xb[r] - target) / alpha[r]        # change of x_q
            direction = 1.0 if step >= 0 else -1.0
            self._pivot(q, r, direction, abs(step), -direction * alpha, alpha, leave_val=target)
            d = d - (d[q] / row[q]) * row
            d[q] = 0.0

    def _bound_flip(self, q, direction, step, delta):
        basis = self.basis
        self.x[basis] += step * delta
        self.x[q] = self.hi[q] if direction > 0 else self.lo[q]
        self.iterations += 1

    def _pivot(self, q, r, direction, theta, delta, alpha, leave_val=None):
        basis = self.basis
        x = self.x
        leaving = int(basis[r])
        x[basis] += theta * delta
        x[q] += direction * theta
        if leave_val is None:
            leave_val = self.lo[leaving] if delta[r] < 0 else self.hi[leaving]
        x[leaving] = leave_val
        if not math.isfinite(x[leaving]):
            raise LpNumericalError("leaving variable moved to an infinite bound")
        piv = alpha[r]
        if abs(piv) < 1e-12:
            raise LpNumericalError("pivot element too small")
        Binv = self.Binv
        row = Binv[r] / piv
        nz = np.flatnonzero(row)
        if 2 * len(nz) < len(row):
            Binv[:, nz] -= np.outer(alpha, row[nz])
        else:
            Binv -= np.outer(alpha, row)
        Binv[r] = row
        basis[r] = q
        self.is_basic[leaving] = False
        self.is_basic[q] = True
        self.iterations += 1
        self.since_refactor += 1

    def _result(self, status, cost) -> LpSolution:
        p = self.p
        vals = self.x[:p.n].copy()
        if status != OPTIMAL:
            obj = math.inf if status == INFEASIBLE else (-math.inf if status == UNBOUNDED else math.nan)
            return LpSolution(status, obj, vals, self.iterations, basis=self.basis.copy())
        at_upper = (~self.is_basic[:p.n + p.m]) & (self.x[:p.n + p.m] >= self.hi[:p.n + p.m] - self.ftol) \
            & (self.x[:p.n + p.m] > self.lo[:p.n + p.m] + self.ftol)
        # tidy tiny bound excursions left by the Harris ratio test
        lo, hi = self.lo[:p.n], self.hi[:p.n]
        vals = np.minimum(np.maximum(vals, lo), hi)
        y = cost[self.basis] @ self.Binv
        d = p.c - y @ self.A[:, :p.n]
        return LpSolution(OPTIMAL, float(p.c @ vals), vals, self.iterations,
                          duals=y, reduced_costs=d, basis=self.basis.copy(), at_upper=at_upper,
                          basis_inverse=self.Binv if self.n_art == 0 else None)


def solve_lp_arrays(A, senses, b, c, lo, hi, **kw) -> LpSolution:
    return LpProblem(A, senses, b, c).solve(lo, hi, **kw)
