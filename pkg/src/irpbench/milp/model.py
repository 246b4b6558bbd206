"""Solver-independent MILP representation.

A :class:`Model` is a list of variables, a list of linear constraints and a
linear minimisation objective.  Variable and constraint ids are dense and
assigned in insertion order.  Formulation builders also return a
:class:`VarIndex` mapping semantic keys such as ``("x", t, i, j)`` to column
ids so that solutions can be decoded.
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping, Sequence

import numpy as np

__all__ = [
    "VarType",
    "Sense",
    "VarDef",
    "LinConstraint",
    "Model",
    "VarIndex",
    "ModelError",
    "Violation",
    "MissingValueError",
    "lp_relaxation",
    "check_feasible",
    "var_name",
]

INF = math.inf
DEFAULT_TOL = 1e-6


class ModelError(ValueError):
    """Invalid model construction (duplicate name, unknown id, bad bounds)."""


class MissingValueError(KeyError):
    """An assignment did not provide a value for some variable."""


class VarType(str, Enum):
    CONTINUOUS = "continuous"
    BINARY = "binary"
    INTEGER = "integer"


class Sense(str, Enum):
    LE = "<="
    EQ = "="
    GE = ">="


@dataclass(frozen=True)
class VarDef:
    name: str
    lo: float = 0.0
    hi: float = INF
    vtype: VarType = VarType.CONTINUOUS

    def __post_init__(self):
        vtype = VarType(self.vtype)
        object.__setattr__(self, "vtype", vtype)
        lo, hi = float(self.lo), float(self.hi)
        if vtype is VarType.BINARY:
            lo, hi = max(lo, 0.0), min(hi, 1.0)
        if math.isnan(lo) or math.isnan(hi) or lo > hi:
            raise ModelError(f"bad bounds [{lo}, {hi}] for {self.name}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def is_integer(self) -> bool:
        return self.vtype is not VarType.CONTINUOUS


@dataclass(frozen=True)
class LinConstraint:
    """``sum(coef * x[var]) <sense> rhs`` with merged, id-sorted terms."""

    terms: tuple[tuple[int, float], ...]
    sense: Sense
    rhs: float
    tag: str = ""

    @classmethod
    def build(cls, terms: Iterable[tuple[int, float]] | Mapping[int, float],
              sense: Sense | str, rhs: float, tag: str = "") -> "LinConstraint":
        items = terms.items() if isinstance(terms, Mapping) else terms
        merged: dict[int, float] = {}
        for vid, coef in items:
            coef = float(coef)
            if not math.isfinite(coef):
                raise ModelError(f"non-finite coefficient in constraint {tag!r}")
            merged[int(vid)] = merged.get(int(vid), 0.0) + coef
        clean = tuple(sorted((v, c) for v, c in merged.items() if c != 0.0))
        if not math.isfinite(float(rhs)):
            raise ModelError(f"non-finite rhs in constraint {tag!r}")
        return cls(clean, Sense(sense), float(rhs), tag)

    def activity(self, values) -> float:
        return math.fsum(c * values[v] for v, c in self.terms)

    def violation(self, values) -> float:
        lhs = self.activity(values)
        if self.sense is Sense.LE:
            return max(0.0, lhs - self.rhs)
        if self.sense is Sense.GE:
            return max(0.0, self.rhs - lhs)
        return abs(lhs - self.rhs)


def var_name(symbol: str, *idx) -> str:
    """Canonical column name ``SYM(a,b,c)``."""
    return f"{symbol}({','.join(str(i) for i in idx)})" if idx else symbol


class Model:
    """Mutable while building; :meth:`freeze` makes it read-only."""

    def __init__(self, name: str = "model"):
        self.name = name
        self.vars: list[VarDef] = []
        self.constraints: list[LinConstraint] = []
        self.objective: dict[int, float] = {}
        self.obj_constant = 0.0
        self.priority: dict[int, int] = {}     # branching priority, default 0
        self._names: dict[str, int] = {}
        self._frozen = False

    # -- building -------------------------------------------------------
    def _check_mutable(self):
        if self._frozen:
            raise ModelError(f"model {self.name!r} is frozen")

    def add_var(self, vdef: VarDef | str, lo: float = 0.0, hi: float = INF,
                vtype: VarType | str = VarType.CONTINUOUS, obj: float = 0.0) -> int:
        self._check_mutable()
        if not isinstance(vdef, VarDef):
            vdef = VarDef(vdef, lo, hi, vtype)
        if vdef.name in self._names:
            raise ModelError(f"duplicate variable name {vdef.name!r}")
        vid = len(self.vars)
        self.vars.append(vdef)
        self._names[vdef.name] = vid
        if obj:
            self.objective[vid] = self.objective.get(vid, 0.0) + float(obj)
        return vid

    def add_constraint(self, c: LinConstraint | Mapping[int, float] | Iterable,
                       sense: Sense | str | None = None, rhs: float | None = None,
                       tag: str = "") -> int:
        self._check_mutable()
        if not isinstance(c, LinConstraint):
            if sense is None or rhs is None:
                raise ModelError("sense and rhs are required")
            c = LinConstraint.build(c, sense, rhs, tag)
        n = len(self.vars)
        for vid, _ in c.terms:
            if not 0 <= vid < n:
                raise ModelError(f"constraint {c.tag!r} references unknown variable id {vid}")
        self.constraints.append(c)
        return len(self.constraints) - 1

    def set_objective(self, terms: Mapping[int, float], constant: float = 0.0) -> None:
        self._check_mutable()
        n = len(self.vars)
        for vid in terms:
            if not 0 <= vid < n:
                raise ModelError(f"objective references unknown variable id {vid}")
        self.objective = {int(v): float(c) for v, c in terms.items() if c != 0.0}
        self.obj_constant = float(constant)

    def add_objective(self, vid: int, coef: float) -> None:
        self._check_mutable()
        if not 0 <= vid < len(self.vars):
            raise ModelError(f"objective references unknown variable id {vid}")
        if coef:
            self.objective[vid] = self.objective.get(vid, 0.0) + float(coef)

    def set_priority(self, vid: int, level: int) -> None:
        """Branch on fractional columns of the highest level first."""
        self._check_mutable()
        if not 0 <= vid < len(self.vars):
            raise ModelError(f"priority references unknown variable id {vid}")
        if level:
            self.priority[vid] = int(level)
        else:
            self.priority.pop(vid, None)

    def freeze(self) -> "Model":
        self._frozen = True
        return self

    @property
    def frozen(self) -> bool:
        return self._frozen

    # -- queries --------------------------------------------------------
    @property
    def num_vars(self) -> int:
        return len(self.vars)

    @property
    def num_constraints(self) -> int:
        return len(self.constraints)

    def var_id(self, name: str) -> int:
        return self._names[name]

    def integer_ids(self) -> list[int]:
        return [i for i, v in enumerate(self.vars) if v.is_integer]

    def objective_value(self, values) -> float:
        return self.obj_constant + math.fsum(c * values[v] for v, c in self.objective.items())

    def tag_counts(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for c in self.constraints:
            out[c.tag] = out.get(c.tag, 0) + 1
        return out

    def to_arrays(self):
        """Dense ``(A, senses, b, c, lo, hi, is_int)`` for the solver."""
        m, n = len(self.constraints), len(self.vars)
        A = np.zeros((m, n))
        b = np.empty(m)
        senses = np.empty(m, dtype="<U2")
        for r, con in enumerate(self.constraints):
            for v, coef in con.terms:
                A[r, v] = coef
            b[r] = con.rhs
            senses[r] = con.sense.value
        c = np.zeros(n)
        for v, coef in self.objective.items():
            c[v] = coef
        lo = np.array([v.lo for v in self.vars], dtype=float)
        hi = np.array([v.hi for v in self.vars], dtype=float)
        is_int = np.array([v.is_integer for v in self.vars], dtype=bool)
        return A, senses, b, c, lo, hi, is_int

    def copy(self, name: str | None = None) -> "Model":
        m = copy.copy(self)
        m.vars = list(self.vars)
        m.constraints = list(self.constraints)
        m.objective = dict(self.objective)
        m.priority = dict(self.priority)
        m._names = dict(self._names)
        m._frozen = False
        if name is not None:
            m.name = name
        return m

    def __eq__(self, other):
        if not isinstance(other, Model):
            return NotImplemented
        return (self.name == other.name and self.vars == other.vars
                and self.constraints == other.constraints
                and self.objective == other.objective
                and self.obj_constant == other.obj_constant)

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self):
        nint = len(self.integer_ids())
        return (f"Model({self.name!r}, vars={self.num_vars} ({nint} integer), "
                f"constraints={self.num_constraints})")


class VarIndex:
    """Bijection between semantic keys and column ids."""

    def __init__(self):
        self._fwd: dict[tuple, int] = {}
        self._rev: dict[int, tuple] = {}

    def add(self, key: tuple, vid: int) -> int:
        if key in self._fwd:
            raise ModelError(f"duplicate semantic key {key}")
        if vid in self._rev:
            raise ModelError(f"column {vid} already indexed as {self._rev[vid]}")
        self._fwd[key] = vid
        self._rev[vid] = key
        return vid

    def __getitem__(self, key: tuple) -> int:
        return self._fwd[key]

    def get(self, key: tuple, default=None):
        return self._fwd.get(key, default)

    def __contains__(self, key) -> bool:
        return key in self._fwd

    def key(self, vid: int) -> tuple:
        return self._rev[vid]

    def keys(self, symbol: str | None = None) -> list[tuple]:
        return [k for k in self._fwd if symbol is None or k[0] == symbol]

    def items(self):
        return self._fwd.items()

    def __len__(self) -> int:
        return len(self._fwd)


def lp_relaxation(model: Model) -> Model:
    """Copy of ``model`` with every variable continuous; bounds are kept."""
    relaxed = model.copy()
    relaxed.vars = [v if not v.is_integer else VarDef(v.name, v.lo, v.hi, VarType.CONTINUOUS)
                    for v in model.vars]
    if model.frozen:
        relaxed.freeze()
    return relaxed


@dataclass(frozen=True)
class Violation:
    kind: str          # "constraint", "bound" or "integrality"
    index: int         # constraint id or variable id
    amount: float
    label: str = ""


def _as_values(model: Model, assignment) -> Sequence[float]:
    n = model.num_vars
    if isinstance(assignment, Mapping):
        vals = []
        for i in range(n):
            if i in assignment:
                vals.append(float(assignment[i]))
            elif model.vars[i].name in assignment:
                vals.append(float(assignment[model.vars[i].name]))
            else:
                raise MissingValueError(f"no value for variable {model.vars[i].name!r}")
        return vals
    vals = [float(v) for v in assignment]
    if len(vals) < n:
        raise MissingValueError(f"assignment has {len(vals)} values, model has {n} variables")
    return vals


def check_feasible(model: Model, assignment, tol: float = DEFAULT_TOL) -> list[Violation]:
    """List every bound, constraint and integrality violation larger than ``tol``.

    An empty list means the assignment is feasible.
    """
    vals = _as_values(model, assignment)
    report: list[Violation] = []
    for i, v in enumerate(model.vars):
        x = vals[i]
        if not math.isfinite(x):
            report.append(Violation("bound", i, INF, v.name))
            continue
        over = max(v.lo - x, x - v.hi, 0.0)
        if over > tol:
            report.append(Violation("bound", i, over, v.name))
        if v.is_integer:
            frac = abs(x - round(x))
            if frac > tol:
                report.append(Violation("integrality", i, frac, v.name))
    for k, con in enumerate(model.constraints):
        amount = con.violation(vals)
        if amount > tol:
            report.append(Violation("constraint", k, amount, con.tag))
    return report
