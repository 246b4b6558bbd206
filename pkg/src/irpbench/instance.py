"""Problem data for the uncapacitated inventory routing problem.

An :class:`IrpInstance` holds everything a formulation needs: a warehouse
(node 0) and ``r`` retailers (nodes ``1..r``), an ``N``-period demand matrix,
per-retailer holding and fixed ordering costs, a per-period dispatching cost
and the routing distance matrix.

Two generators are provided.  :func:`generate_design1` draws small random
instances with constant per-retailer demand; :func:`generate_design2` builds
the 18 structured scenarios on a fixed 16-retailer layout.  All randomness
goes through :func:`make_rng` (numpy ``PCG64``), so a seed fully determines
an instance.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np

__all__ = [
    "IrpInstance",
    "InstanceFormatError",
    "PatternKind",
    "DemandPattern",
    "OrderingProfile",
    "ScenarioSpec",
    "make_rng",
    "euclidean_distance",
    "distance_matrix",
    "generate_design1",
    "generate_design2",
    "generate_random",
    "generate_pattern",
    "default_pattern",
    "load_layout",
    "load_instance",
    "save_instance",
    "format_instance",
    "parse_instance",
]

DESIGN2_RETAILERS = 16
DESIGN2_PERIODS = 15
DESIGN2_DISPATCH = 15000.0


class InstanceFormatError(ValueError):
    """Raised for malformed or inconsistent instance files."""


def make_rng(seed: int) -> np.random.Generator:
    """Return the package RNG: numpy ``Generator`` over ``PCG64(seed)``."""
    return np.random.Generator(np.random.PCG64(seed))


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.flags.writeable = False
    return a


def _sig9(x: float) -> float:
    return float(f"{x:.9g}")


@dataclass(frozen=True, eq=False)
class IrpInstance:
    """Immutable IRP data.

    Arrays are stored read-only.  ``demand`` has shape ``(N, r)``;
    ``dist`` has shape ``(r + 1, r + 1)`` with the warehouse at index 0.
    """

    name: str
    demand: np.ndarray
    holding: np.ndarray
    ordering: np.ndarray
    dispatch: float
    dist: np.ndarray
    coords: np.ndarray | None = None
    initial_inventory: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        demand = np.asarray(self.demand)
        if demand.ndim != 2:
            raise ValueError("demand must be an (N, r) matrix")
        if demand.size and not np.all(np.equal(np.mod(demand, 1), 0)):
            raise ValueError("demand must be integral")
        demand = demand.astype(np.int64)
        n_periods, r = demand.shape
        if r < 1 or n_periods < 1:
            raise ValueError("need at least one retailer and one period")
        holding = np.asarray(self.holding, dtype=float).reshape(-1)
        ordering = np.asarray(self.ordering, dtype=float).reshape(-1)
        dist = np.asarray(self.dist, dtype=float)
        if holding.shape != (r,) or ordering.shape != (r,):
            raise ValueError(f"holding/ordering must have length r={r}")
        if dist.shape != (r + 1, r + 1):
            raise ValueError(f"dist must be {(r + 1, r + 1)}, got {dist.shape}")
        for label, arr in (("demand", demand), ("holding", holding),
                           ("ordering", ordering), ("dist", dist)):
            if not np.all(np.isfinite(arr)) or np.any(arr < 0):
                raise ValueError(f"{label} must be finite and nonnegative")
        dispatch = float(self.dispatch)
        if not math.isfinite(dispatch) or dispatch < 0:
            raise ValueError("dispatch must be finite and nonnegative")
        coords = self.coords
        if coords is not None:
            coords = np.asarray(coords, dtype=float)
            if coords.shape != (r + 1, 2):
                raise ValueError(f"coords must be {(r + 1, 2)}")
            coords = _readonly(coords)
        init = self.initial_inventory
        init = np.zeros(r) if init is None else np.asarray(init, dtype=float)
        if init.shape != (r,) or np.any(init != 0):
            raise ValueError("initial inventory is fixed at zero")
        set_ = object.__setattr__
        set_(self, "demand", _readonly(demand))
        set_(self, "holding", _readonly(holding))
        set_(self, "ordering", _readonly(ordering))
        set_(self, "dist", _readonly(dist))
        set_(self, "coords", coords)
        set_(self, "dispatch", dispatch)
        set_(self, "initial_inventory", _readonly(init))

    @property
    def num_periods(self) -> int:
        return self.demand.shape[0]

    @property
    def num_retailers(self) -> int:
        return self.demand.shape[1]

    def __eq__(self, other):
        if not isinstance(other, IrpInstance):
            return NotImplemented
        if (self.coords is None) != (other.coords is None):
            return False
        return (
            self.name == other.name
            and self.dispatch == other.dispatch
            and np.array_equal(self.demand, other.demand)
            and np.array_equal(self.holding, other.holding)
            and np.array_equal(self.ordering, other.ordering)
            and np.array_equal(self.dist, other.dist)
            and (self.coords is None or np.array_equal(self.coords, other.coords))
        )

    __hash__ = None  # type: ignore[assignment]

    def subset(self, retailers: Sequence[int], periods: int | None = None,
               name: str | None = None) -> "IrpInstance":
        """Restrict to the given retailer ids (1-based) and first ``periods`` periods."""
        idx = [int(i) for i in retailers]
        if not idx or min(idx) < 1 or max(idx) > self.num_retailers:
            raise ValueError("retailer ids out of range")
        n = self.num_periods if periods is None else int(periods)
        nodes = [0] + idx
        cols = [i - 1 for i in idx]
        return IrpInstance(
            name=name or f"{self.name}-sub",
            demand=self.demand[:n, cols],
            holding=self.holding[cols],
            ordering=self.ordering[cols],
            dispatch=self.dispatch,
            dist=self.dist[np.ix_(nodes, nodes)],
            coords=None if self.coords is None else self.coords[nodes],
        )


def euclidean_distance(p: Sequence[float], q: Sequence[float]) -> float:
    return math.hypot(float(p[0]) - float(q[0]), float(p[1]) - float(q[1]))


def distance_matrix(coords) -> np.ndarray:
    """Pairwise Euclidean distances; exactly symmetric with zero diagonal."""
    pts = np.asarray(coords, dtype=float)
    n = len(pts)
    d = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            d[i, j] = d[j, i] = euclidean_distance(pts[i], pts[j])
    return d


# ---------------------------------------------------------------- design 1

def generate_design1(seed: int, periods: int, retailers: int,
                     strict: bool = False) -> IrpInstance:
    """Random instance with constant per-retailer demand.

    Demand is one uniform integer in ``[10, 100]`` per retailer, repeated in
    every period.  Holding costs are uniform on ``[0.01, 0.05]`` (rounded to
    9 significant digits so files round-trip), coordinates are uniform
    integers on ``[0, 500]^2``, ordering cost is 10 and dispatching cost 0.

    Sizes outside the canonical grid (``N`` in {3, 6}, ``r`` a multiple of 5
    up to 50 resp. 30) are accepted unless ``strict`` is set.
    """
    if retailers < 1 or periods < 1:
        raise ValueError("retailers and periods must be >= 1")
    if strict and not is_canonical_design1(periods, retailers):
        raise ValueError(f"non-canonical design-1 size N={periods}, r={retailers}")
    rng = make_rng(seed)
    coords = rng.integers(0, 500, size=(retailers + 1, 2), endpoint=True)
    base = rng.integers(10, 100, size=retailers, endpoint=True)
    holding = np.array([_sig9(h) for h in rng.uniform(0.01, 0.05, size=retailers)])
    return IrpInstance(
        name=f"d1-N{periods}-r{retailers}-s{seed}",
        demand=np.tile(base, (periods, 1)),
        holding=holding,
        ordering=np.full(retailers, 10.0),
        dispatch=0.0,
        dist=distance_matrix(coords),
        coords=coords,
    )


def generate_random(seed: int, retailers: int, periods: int) -> IrpInstance:
    """Small instance with balanced cost terms, for cross-checking formulations.

    Demand is uniform on ``{0..60}`` (zeros included), holding on ``[0.5, 4]``,
    ordering on ``[20, 150]``, dispatching on ``[0, 100]`` and coordinates on
    ``[0, 100]^2``, so visit patterns genuinely trade off against each other.
    """
    if retailers < 1 or periods < 1:
        raise ValueError("retailers and periods must be >= 1")
    rng = make_rng(seed)
    coords = rng.integers(0, 100, size=(retailers + 1, 2), endpoint=True)
    demand = rng.integers(0, 60, size=(periods, retailers), endpoint=True)
    holding = np.array([_sig9(h) for h in rng.uniform(0.5, 4.0, size=retailers)])
    ordering = rng.integers(20, 150, size=retailers, endpoint=True).astype(float)
    dispatch = float(rng.integers(0, 100, endpoint=True))
    return IrpInstance(
        name=f"rnd-N{periods}-r{retailers}-s{seed}",
        demand=demand,
        holding=holding,
        ordering=ordering,
        dispatch=dispatch,
        dist=distance_matrix(coords),
        coords=coords,
    )


def is_canonical_design1(periods: int, retailers: int) -> bool:
    top = {3: 50, 6: 30}.get(periods)
    return top is not None and retailers % 5 == 0 and 5 <= retailers <= top


# ---------------------------------------------------------------- patterns

class PatternKind(str, Enum):
    STA = "STA"
    LCY1 = "LCY1"
    LCY2 = "LCY2"
    SIN1 = "SIN1"
    SIN2 = "SIN2"
    RAND = "RAND"


@dataclass(frozen=True)
class DemandPattern:
    """Parameters of one demand series.

    ``level`` is the STA value and the centre line for LCY/SIN.  LCY series
    run from ``level - amplitude`` at the far end up to ``level + amplitude``
    at ``peak`` (1-based; defaults to N/3 for LCY1 and 2N/3 for LCY2).  SIN
    series are ``level + amplitude * sin(2*pi*(t-1)/N + phase)``.  RAND draws
    uniform integers on ``[low, high]`` from ``seed``.
    """

    kind: PatternKind
    level: float = 100.0
    amplitude: float = 50.0
    phase: float = 0.0
    peak: int | None = None
    low: int = 50
    high: int = 150
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kind", PatternKind(self.kind))
        if self.level < 0 or self.amplitude < 0:
            raise ValueError("level and amplitude must be nonnegative")
        if self.low < 0 or self.high < self.low:
            raise ValueError("RAND range must satisfy 0 <= low <= high")


def default_pattern(kind: PatternKind | str, seed: int = 0) -> DemandPattern:
    kind = PatternKind(kind)
    if kind is PatternKind.SIN2:
        return DemandPattern(kind, phase=math.pi)
    if kind is PatternKind.STA:
        return DemandPattern(kind, amplitude=0.0)
    return DemandPattern(kind, seed=seed)


def generate_pattern(p: DemandPattern, periods: int) -> np.ndarray:
    """Integer demand series of length ``periods`` for pattern ``p``."""
    if periods < 1:
        raise ValueError("periods must be >= 1")
    n = periods
    t = np.arange(1, n + 1, dtype=float)
    kind = p.kind
    if kind is PatternKind.STA:
        series = np.full(n, p.level)
    elif kind in (PatternKind.LCY1, PatternKind.LCY2):
        frac = 1 / 3 if kind is PatternKind.LCY1 else 2 / 3
        peak = p.peak if p.peak is not None else int(round(n * frac))
        peak = min(max(peak, 1), n)
        span = max(peak - 1, n - peak, 1)
        series = p.level + p.amplitude * (1 - 2 * np.abs(t - peak) / span)
    elif kind in (PatternKind.SIN1, PatternKind.SIN2):
        series = p.level + p.amplitude * np.sin(2 * np.pi * (t - 1) / n + p.phase)
    else:
        return make_rng(p.seed).integers(p.low, p.high, size=n, endpoint=True).astype(np.int64)
    return np.maximum(np.rint(series), 0).astype(np.int64)


# ---------------------------------------------------------------- design 2

class OrderingProfile(str, Enum):
    NONE = "none"
    UNIFORM = "uniform-1000"
    MIXED = "mixed-500/1000/2000"


# Retailer blocks (sizes 5, 6, 5) used by the heterogeneous demand and cost profiles.
_BLOCKS = ((0, 5), (5, 11), (11, 16))
_MIX_ORDER = (PatternKind.STA, PatternKind.LCY1, PatternKind.LCY2,
              PatternKind.SIN1, PatternKind.SIN2, PatternKind.RAND)


def _block_values(values: Sequence[float], r: int = DESIGN2_RETAILERS) -> list[float]:
    out = []
    for (lo, hi), v in zip(_BLOCKS, values):
        out.extend([v] * (hi - lo))
    return out[:r]


@dataclass(frozen=True)
class ScenarioSpec:
    """One of the 18 structured scenarios.

    Scenarios 1-9 have no dispatching cost, 10-18 repeat them with
    ``dispatch_cost = 15000``.  Inside each block of nine, ids group by
    ordering profile (none, uniform 1000, mixed 500/1000/2000) and cycle the
    demand designs A (all 100), B (100/50/75 blocks) and C (six-pattern mix).
    """

    scenario_id: int
    demand_assignment: tuple[DemandPattern, ...]
    ordering_profile: OrderingProfile
    dispatch_cost: float

    @property
    def demand_group(self) -> str:
        return "ABC"[(self.scenario_id - 1) % 3]

    @classmethod
    def from_id(cls, scenario_id: int, seed: int = 0) -> "ScenarioSpec":
        if not 1 <= scenario_id <= 18:
            raise ValueError(f"scenario_id must be in 1..18, got {scenario_id}")
        within = (scenario_id - 1) % 9
        profile = list(OrderingProfile)[within // 3]
        group = within % 3
        sta = PatternKind.STA
        if group == 0:
            patterns = [DemandPattern(sta, level=100, amplitude=0)] * DESIGN2_RETAILERS
        elif group == 1:
            patterns = [DemandPattern(sta, level=v, amplitude=0)
                        for v in _block_values([100, 50, 75])]
        else:
            patterns = [default_pattern(_MIX_ORDER[i % 6], seed=seed * 1000 + i)
                        for i in range(DESIGN2_RETAILERS)]
        dispatch = 0.0 if scenario_id <= 9 else DESIGN2_DISPATCH
        return cls(scenario_id, tuple(patterns), profile, dispatch)

    def ordering_costs(self) -> list[float]:
        if self.ordering_profile is OrderingProfile.NONE:
            return [0.0] * DESIGN2_RETAILERS
        if self.ordering_profile is OrderingProfile.UNIFORM:
            return [1000.0] * DESIGN2_RETAILERS
        return _block_values([500.0, 1000.0, 2000.0])


def load_layout(path: str | Path | None = None) -> np.ndarray:
    """Read a 17-point ``i x y`` coordinate file (warehouse first).

    With no path, the bundled 16-retailer layout is returned.
    """
    if path is None:
        text = resources.files("irpbench").joinpath("data/layout16.txt").read_text()
    else:
        text = Path(path).read_text()
    pts = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            _, x, y = line.split()
            pts.append((float(x), float(y)))
    return np.array(pts)


def generate_design2(spec: ScenarioSpec | int, seed: int = 0, *,
                     retailers: int | None = None, periods: int = DESIGN2_PERIODS,
                     layout=None) -> IrpInstance:
    """Build a structured scenario on the 16-retailer layout.

    ``retailers`` and ``periods`` shrink the instance (first ``retailers``
    retailers, first ``periods`` periods) for desk-scale runs; ``layout``
    overrides the bundled coordinates with any 17-point array or file.
    """
    if not isinstance(spec, ScenarioSpec):
        spec = ScenarioSpec.from_id(int(spec), seed=seed)
    coords = load_layout(layout) if layout is None or isinstance(layout, (str, Path)) \
        else np.asarray(layout, dtype=float)
    if coords.shape != (DESIGN2_RETAILERS + 1, 2):
        raise ValueError("design-2 layout must have 17 points")
    r = DESIGN2_RETAILERS if retailers is None else int(retailers)
    if not 1 <= r <= DESIGN2_RETAILERS or periods < 1:
        raise ValueError("retailers must be in 1..16 and periods >= 1")
    demand = np.column_stack([generate_pattern(p, periods)
                              for p in spec.demand_assignment[:r]])
    coords = coords[: r + 1]
    return IrpInstance(
        name=f"d2-s{spec.scenario_id}" + ("" if r == 16 and periods == 15 else f"-r{r}-N{periods}"),
        demand=demand,
        holding=np.ones(r),
        ordering=np.array(spec.ordering_costs()[:r]),
        dispatch=spec.dispatch_cost,
        dist=distance_matrix(coords),
        coords=coords,
    )


# ---------------------------------------------------------------- file format

def _fmt(x: float) -> str:
    x = float(x)
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    s = f"{x:.9g}"
    return s if float(s) == x else repr(x)


def format_instance(inst: IrpInstance) -> str:
    r, n = inst.num_retailers, inst.num_periods
    lines = ["# irpbench instance", f"NAME {inst.name}", f"SIZE {r} {n}"]
    if inst.coords is not None:
        lines.append("COORDS")
        lines += [f"{i} {_fmt(x)} {_fmt(y)}" for i, (x, y) in enumerate(inst.coords)]
    if inst.coords is None or not np.array_equal(distance_matrix(inst.coords), inst.dist):
        lines.append("DIST")
        lines += [" ".join(_fmt(v) for v in row) for row in inst.dist]
    lines.append("DEMAND")
    lines += [" ".join(str(int(v)) for v in row) for row in inst.demand]
    lines.append("HOLDING")
    lines.append(" ".join(_fmt(v) for v in inst.holding))
    lines.append("ORDERING")
    lines.append(" ".join(_fmt(v) for v in inst.ordering))
    lines.append(f"DISPATCH {_fmt(inst.dispatch)}")
    return "\n".join(lines) + "\n"


def save_instance(inst: IrpInstance, path: str | Path) -> None:
    Path(path).write_text(format_instance(inst), encoding="utf-8")


_SECTIONS = ("NAME", "SIZE", "COORDS", "DIST", "DEMAND", "HOLDING", "ORDERING", "DISPATCH")


def parse_instance(text: str, source: str = "<string>") -> IrpInstance:
    """Parse the sectioned text format; see :func:`format_instance`."""
    rows: list[tuple[int, list[str]]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            rows.append((lineno, line.split()))

    pos = 0

    def err(msg, lineno=None):
        where = f"{source}:{lineno}: " if lineno else f"{source}: "
        return InstanceFormatError(where + msg)

    def numbers(count, section, conv=float):
        nonlocal pos
        out = []
        while len(out) < count:
            if pos >= len(rows) or rows[pos][1][0] in _SECTIONS:
                raise err(f"section {section}: expected {count} values, found {len(out)}")
            lineno, toks = rows[pos]
            pos += 1
            try:
                out.extend(conv(t) for t in toks)
            except ValueError:
                raise err(f"section {section}: bad number in {' '.join(toks)!r}", lineno) from None
        if len(out) != count:
            raise err(f"section {section}: expected {count} values, found {len(out)}")
        return out

    def matrix(nrows, ncols, section, conv=float):
        nonlocal pos
        out = []
        for k in range(nrows):
            if pos >= len(rows) or rows[pos][1][0] in _SECTIONS:
                raise err(f"section {section}: expected {nrows} rows, found {k}")
            lineno, toks = rows[pos]
            pos += 1
            if len(toks) != ncols:
                raise err(f"dimension mismatch in {section} row {k + 1}: "
                          f"expected {ncols} values, got {len(toks)}", lineno)
            try:
                out.append([conv(t) for t in toks])
            except ValueError:
                raise err(f"section {section}: bad number in {' '.join(toks)!r}", lineno) from None
        return out

    found: dict[str, object] = {}
    r = n = None
    while pos < len(rows):
        lineno, toks = rows[pos]
        key = toks[0]
        pos += 1
        if key not in _SECTIONS:
            raise err(f"unknown section {key!r}", lineno)
        if key in found:
            raise err(f"duplicate section {key}", lineno)
        if key == "NAME":
            found[key] = " ".join(toks[1:])
        elif key == "SIZE":
            if len(toks) != 3 or not all(re.fullmatch(r"\d+", t) for t in toks[1:]):
                raise err("SIZE expects two integers 'r N'", lineno)
            r, n = int(toks[1]), int(toks[2])
            found[key] = (r, n)
        elif key == "DISPATCH":
            if len(toks) != 2:
                raise err("DISPATCH expects one value", lineno)
            found[key] = float(toks[1])
        else:
            if r is None:
                raise err(f"section {key} before SIZE", lineno)
            if key == "COORDS":
                pts = matrix(r + 1, 3, key)
                found[key] = [(x, y) for _, x, y in pts]
            elif key == "DIST":
                found[key] = matrix(r + 1, r + 1, key)
            elif key == "DEMAND":
                found[key] = matrix(n, r, key, conv=int)
            else:
                found[key] = numbers(r, key)
    for req in ("NAME", "SIZE", "DEMAND", "HOLDING", "ORDERING", "DISPATCH"):
        if req not in found:
            raise err(f"missing section {req}")
    if "COORDS" not in found and "DIST" not in found:
        raise err("missing section COORDS (or DIST)")
    coords = np.array(found["COORDS"]) if "COORDS" in found else None
    dist = np.array(found["DIST"]) if "DIST" in found else distance_matrix(coords)
    try:
        return IrpInstance(
            name=found["NAME"], demand=np.array(found["DEMAND"]),
            holding=found["HOLDING"], ordering=found["ORDERING"],
            dispatch=found["DISPATCH"], dist=dist, coords=coords,
        )
    except ValueError as exc:
        raise err(str(exc)) from None


def load_instance(path: str | Path) -> IrpInstance:
    path = Path(path)
    return parse_instance(path.read_text(encoding="utf-8"), source=str(path))
