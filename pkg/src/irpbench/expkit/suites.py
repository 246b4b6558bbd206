"""Fixed instance suites used by the cross-checks, tests and notebooks.

Each suite is a deterministic function of its index, so a failing case can
be rebuilt on its own.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..instance import IrpInstance, distance_matrix, generate_random, make_rng

__all__ = [
    "LotSizingCase",
    "agreement_case",
    "agreement_suite",
    "tsp_case",
    "tsp_suite",
    "lot_sizing_case",
    "lot_sizing_suite",
    "dominance_case",
    "dominance_suite",
    "AGREEMENT_SIZE",
    "TSP_SIZE",
    "LOT_SIZING_SIZE",
    "DOMINANCE_SIZE",
]

AGREEMENT_SIZE = 25
TSP_SIZE = 50
LOT_SIZING_SIZE = 200
DOMINANCE_SIZE = 30


def agreement_case(k: int) -> IrpInstance:
    """r cycles through 2, 3, 4 and N through 2, 3."""
    return generate_random(100 + k, (2, 3, 4)[k % 3], (2, 3)[(k // 3) % 2])


def agreement_suite() -> list[IrpInstance]:
    return [agreement_case(k) for k in range(AGREEMENT_SIZE)]


def tsp_case(k: int) -> np.ndarray:
    """Euclidean matrix on ``3 + k % 6`` integer points in ``[0, 100]^2``."""
    n = 3 + k % 6
    pts = make_rng(1000 + k).integers(0, 100, size=(n, 2), endpoint=True)
    return distance_matrix(pts)


def tsp_suite() -> list[np.ndarray]:
    return [tsp_case(k) for k in range(TSP_SIZE)]


@dataclass(frozen=True)
class LotSizingCase:
    demand: tuple[int, ...]
    K: float
    h: float


def lot_sizing_case(k: int) -> LotSizingCase:
    """``N = 1 + k % 10`` periods, demand on ``{0..50}``, K on ``{0..200}``, h in halves."""
    rng = make_rng(2000 + k)
    n = 1 + k % 10
    demand = tuple(int(d) for d in rng.integers(0, 50, size=n, endpoint=True))
    K = float(rng.integers(0, 200, endpoint=True))
    h = float(rng.integers(1, 8, endpoint=True)) / 2
    return LotSizingCase(demand, K, h)


def lot_sizing_suite() -> list[LotSizingCase]:
    return [lot_sizing_case(k) for k in range(LOT_SIZING_SIZE)]


def dominance_case(k: int) -> IrpInstance:
    """r cycles through 3, 4, 5 and N through 1, 2, 3."""
    return generate_random(300 + k, 3 + k % 3, 1 + (k // 3) % 3)


def dominance_suite() -> list[IrpInstance]:
    return [dominance_case(k) for k in range(DOMINANCE_SIZE)]
