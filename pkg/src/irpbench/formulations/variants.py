"""Names for the routing and inventory building blocks and their combinations."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

__all__ = [
    "TspBase",
    "Ineq",
    "TspVariant",
    "InventoryVariant",
    "FormulationSpec",
    "BASE_SPECS",
    "BEKTAS_COLUMNS",
    "all_specs",
]


class TspBase(str, Enum):
    MTZ = "MTZ"
    MTZ_2CLQ = "MTZ+2CLQ"
    DL = "DL"
    SC = "SC"
    TWO_C = "2C"

    @property
    def uses_sequence(self) -> bool:
        return self in (TspBase.MTZ, TspBase.MTZ_2CLQ, TspBase.DL)


class Ineq(str, Enum):
    """Lifted inequality families layered on the sequence variables."""

    THREE_CLQ = "3CLQ"
    NR = "NR"
    R = "R"
    L3 = "L3"
    TWO_P = "2P"


_INEQ_ORDER = {e: k for k, e in enumerate((Ineq.THREE_CLQ, Ineq.NR, Ineq.R, Ineq.L3, Ineq.TWO_P))}


@dataclass(frozen=True)
class TspVariant:
    base: TspBase
    extras: frozenset[Ineq] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "base", TspBase(self.base))
        object.__setattr__(self, "extras", frozenset(Ineq(e) for e in self.extras))
        if self.extras and not self.base.uses_sequence:
            raise ValueError(f"{self.base.value} has no sequence variables; "
                             "lifted inequalities need MTZ, MTZ+2CLQ or DL")

    @property
    def name(self) -> str:
        parts = [self.base.value] + [e.value for e in sorted(self.extras, key=_INEQ_ORDER.get)]
        return "+".join(parts)

    @classmethod
    def parse(cls, text: str) -> "TspVariant":
        """Parse names such as ``DL``, ``MTZ+2CLQ``, ``DL+NR+R+2P`` or ``R+2P``.

        A bare inequality list (``R+2P``) is layered on DL.
        """
        tokens = [t.strip().upper() for t in text.split("+") if t.strip()]
        if not tokens:
            raise ValueError("empty TSP variant name")
        base = None
        if tokens[:2] == ["MTZ", "2CLQ"]:
            base, rest = TspBase.MTZ_2CLQ, tokens[2:]
        elif tokens[0] in ("MTZ", "DL", "SC", "2C"):
            base, rest = TspBase(tokens[0]), tokens[1:]
        else:
            base, rest = TspBase.DL, tokens
        extras = set()
        for tok in rest:
            if tok == "2CLQ" and base is TspBase.MTZ:
                base = TspBase.MTZ_2CLQ
                continue
            try:
                extras.add(Ineq(tok))
            except ValueError:
                raise ValueError(f"unknown TSP component {tok!r} in {text!r}") from None
        return cls(base, frozenset(extras))

    def __str__(self):
        return self.name


class InventoryVariant(str, Enum):
    CMILP = "CMILP"
    SP = "SP"


@dataclass(frozen=True)
class FormulationSpec:
    inventory: InventoryVariant
    tsp: TspVariant

    def __post_init__(self):
        object.__setattr__(self, "inventory", InventoryVariant(self.inventory))
        if not isinstance(self.tsp, TspVariant):
            object.__setattr__(self, "tsp", TspVariant.parse(str(self.tsp)))

    @property
    def name(self) -> str:
        return f"{self.inventory.value}+{self.tsp.name}"

    @classmethod
    def parse(cls, text: str) -> "FormulationSpec":
        """``CMILP+DL+3CLQ`` style names."""
        inv, _, rest = text.strip().partition("+")
        if not rest:
            raise ValueError(f"formulation name needs INVENTORY+TSP, got {text!r}")
        try:
            inventory = InventoryVariant(inv.upper())
        except ValueError:
            raise ValueError(f"unknown inventory model {inv!r}") from None
        return cls(inventory, TspVariant.parse(rest))

    def __str__(self):
        return self.name


BASE_SPECS = tuple(FormulationSpec(inv, TspVariant(base))
                   for inv in InventoryVariant for base in TspBase)

# Lifted-inequality columns reported for both inventory models.
BEKTAS_COLUMNS = ("DL+3CLQ", "DL+NR", "DL+L3", "DL+2P", "DL+R",
                  "R+2P", "NR+2P", "NR+R+2P", "DL+NR+R+2P")


def all_specs(with_lifted: bool = True) -> list[FormulationSpec]:
    specs = list(BASE_SPECS)
    if with_lifted:
        specs += [FormulationSpec(inv, TspVariant.parse(col))
                  for inv in InventoryVariant for col in BEKTAS_COLUMNS]
    return specs
