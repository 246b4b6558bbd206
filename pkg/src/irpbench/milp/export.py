"""Writers for the CPLEX-style LP format and fixed-column MPS.

Both writers emit rows and columns in id order, so exporting the same model
twice gives byte-identical files.  Names that do not fit a format are
replaced by ``x<id>`` / ``C<id>`` style labels; every export also writes a
``<file>.map`` sidecar listing ``exported-name  model-name  [semantic key]``.
"""

from __future__ import annotations

import math
import re
from pathlib import Path

from .model import Model, Sense, VarIndex

__all__ = ["export_lp", "export_mps", "format_lp", "format_mps"]

LP_NAME_MAX = 255
MPS_NAME_MAX = 8
_LP_OK = re.compile(r"^[A-Za-z!\"#$%&()/,;?@_`'{}|~][A-Za-z0-9!\"#$%&()/,.;?@_`'{}|~]*$")


def _num(x: float) -> str:
    x = float(x)
    if x == 0:
        return "0"
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def _lp_names(model: Model) -> tuple[list[str], list[str]]:
    cols = []
    for i, v in enumerate(model.vars):
        ok = len(v.name) <= LP_NAME_MAX and _LP_OK.match(v.name) and v.name.lower() not in ("e", "inf", "infinity", "free")
        cols.append(v.name if ok else f"x{i}")
    rows = []
    for k, c in enumerate(model.constraints):
        tag = re.sub(r"[^A-Za-z0-9_]", "_", c.tag) or "c"
        if not tag[0].isalpha():
            tag = "c" + tag
        rows.append(f"{tag}_{k}"[:LP_NAME_MAX])
    return cols, rows


def _expr(terms, names) -> str:
    parts = []
    for vid, coef in terms:
        sign = "-" if coef < 0 else "+"
        mag = abs(coef)
        body = names[vid] if mag == 1 else f"{_num(mag)} {names[vid]}"
        parts.append(f"{sign} {body}")
    if not parts:
        return "0 " + names[0] if names else "0"
    text = " ".join(parts)
    return text[2:] if text.startswith("+ ") else text


def _wrap(prefix: str, body: str, width: int = 100) -> list[str]:
    out, line = [], prefix
    for tok in re.split(r"(?= [+-] )", body):
        if len(line) + len(tok) > width and line.strip():
            out.append(line)
            line = "   "
        line += tok
    out.append(line)
    return out


def format_lp(model: Model) -> tuple[str, list[str], list[str]]:
    cols, rows = _lp_names(model)
    lines = [f"\\ Model: {model.name}", "\\ Generated by irpbench", "Minimize"]
    obj = sorted(model.objective.items())
    body = _expr(obj, cols)
    if model.obj_constant:
        body += f" + {_num(model.obj_constant)}" if model.obj_constant > 0 else f" - {_num(-model.obj_constant)}"
    lines += _wrap(" obj: ", body)
    lines.append("Subject To")
    for k, c in enumerate(model.constraints):
        lines += _wrap(f" {rows[k]}: ", f"{_expr(c.terms, cols)} {c.sense.value} {_num(c.rhs)}")
    lines.append("Bounds")
    for i, v in enumerate(model.vars):
        name = cols[i]
        if v.vtype.value == "binary" and v.lo == 0 and v.hi == 1:
            continue
        if v.lo == v.hi:
            lines.append(f" {name} = {_num(v.lo)}")
        elif v.lo == -math.inf and v.hi == math.inf:
            lines.append(f" {name} free")
        elif v.lo == 0 and v.hi == math.inf:
            if v.is_integer:
                lines.append(f" {name} >= 0")
        else:
            lo = "-inf" if v.lo == -math.inf else _num(v.lo)
            hi = "+inf" if v.hi == math.inf else _num(v.hi)
            lines.append(f" {lo} <= {name} <= {hi}")
    bins = [cols[i] for i, v in enumerate(model.vars) if v.vtype.value == "binary"]
    gens = [cols[i] for i, v in enumerate(model.vars) if v.vtype.value == "integer"]
    for head, names in (("Binaries", bins), ("Generals", gens)):
        if names:
            lines.append(head)
            for k in range(0, len(names), 8):
                lines.append(" " + " ".join(names[k:k + 8]))
    lines.append("End")
    return "\n".join(lines) + "\n", cols, rows


def _mps_num(x: float) -> str:
    s = _num(x)
    if len(s) <= 12:
        return s
    for prec in range(11, 0, -1):
        s = f"{x:.{prec}g}"
        if len(s) <= 12:
            return s
    raise ValueError(f"cannot fit {x} in a 12-character MPS field")


def _field_line(f1="", f2="", f3="", f4="", f5="", f6="") -> str:
    line = f" {f1:<2} {f2:<8}  {f3:<8}  {f4:>12}"
    if f5:
        line += f"   {f5:<8}  {f6:>12}"
    return line.rstrip()


def format_mps(model: Model) -> tuple[str, list[str], list[str]]:
    cols = [f"C{i:07d}" for i in range(model.num_vars)]
    rows = [f"R{k:07d}" for k in range(model.num_constraints)]
    by_col: list[list[tuple[str, float]]] = [[] for _ in cols]
    for vid, coef in sorted(model.objective.items()):
        by_col[vid].append(("OBJ", coef))
    for k, c in enumerate(model.constraints):
        for vid, coef in c.terms:
            by_col[vid].append((rows[k], coef))
    kind = {Sense.LE: "L", Sense.GE: "G", Sense.EQ: "E"}
    name = re.sub(r"\s", "_", model.name)[:MPS_NAME_MAX] or "MODEL"
    lines = [f"NAME          {name}", "ROWS", " N  OBJ"]
    lines += [f" {kind[c.sense]}  {rows[k]}" for k, c in enumerate(model.constraints)]
    lines.append("COLUMNS")
    in_int = False
    marker = 0
    for i, v in enumerate(model.vars):
        if v.is_integer != in_int:
            tag = "'INTORG'" if v.is_integer else "'INTEND'"
            lines.append(_field_line("", f"M{marker:07d}", "'MARKER'", "", tag))
            marker += 1
            in_int = v.is_integer
        entries = by_col[i] or [("OBJ", 0.0)]
        for k in range(0, len(entries), 2):
            pair = entries[k:k + 2]
            if len(pair) == 2:
                lines.append(_field_line("", cols[i], pair[0][0], _mps_num(pair[0][1]),
                                         pair[1][0], _mps_num(pair[1][1])))
            else:
                lines.append(_field_line("", cols[i], pair[0][0], _mps_num(pair[0][1])))
    if in_int:
        lines.append(_field_line("", f"M{marker:07d}", "'MARKER'", "", "'INTEND'"))
    lines.append("RHS")
    rhs = [(rows[k], c.rhs) for k, c in enumerate(model.constraints) if c.rhs != 0]
    if model.obj_constant:
        rhs.insert(0, ("OBJ", -model.obj_constant))
    for k in range(0, len(rhs), 2):
        pair = rhs[k:k + 2]
        if len(pair) == 2:
            lines.append(_field_line("", "RHS", pair[0][0], _mps_num(pair[0][1]),
                                     pair[1][0], _mps_num(pair[1][1])))
        else:
            lines.append(_field_line("", "RHS", pair[0][0], _mps_num(pair[0][1])))
    lines.append("BOUNDS")
    for i, v in enumerate(model.vars):
        c = cols[i]
        if v.vtype.value == "binary" and v.lo == 0 and v.hi == 1:
            lines.append(_field_line("BV", "BND", c))
            continue
        if v.lo == v.hi:
            lines.append(_field_line("FX", "BND", c, _mps_num(v.lo)))
            continue
        if v.lo == -math.inf and v.hi == math.inf:
            lines.append(_field_line("FR", "BND", c))
            continue
        if v.lo == -math.inf:
            lines.append(_field_line("MI", "BND", c))
        elif v.lo != 0 or v.is_integer:
            lines.append(_field_line("LO", "BND", c, _mps_num(v.lo)))
        if v.hi != math.inf:
            lines.append(_field_line("UP", "BND", c, _mps_num(v.hi)))
        elif v.is_integer:
            lines.append(_field_line("PL", "BND", c))
    lines.append("ENDATA")
    return "\n".join(lines) + "\n", cols, rows


def _write_map(path: Path, model: Model, cols: list[str], rows: list[str],
               index: VarIndex | None) -> Path:
    out = ["# exported-name\tmodel-name\tsemantic-key"]
    for i, v in enumerate(model.vars):
        key = ""
        if index is not None:
            try:
                key = repr(index.key(i))
            except KeyError:
                key = ""
        out.append(f"{cols[i]}\t{v.name}\t{key}".rstrip("\t"))
    for k, c in enumerate(model.constraints):
        out.append(f"{rows[k]}\t{c.tag}")
    map_path = path.with_name(path.name + ".map")
    map_path.write_text("\n".join(out) + "\n", encoding="utf-8")
    return map_path


def export_lp(model: Model, path: str | Path, index: VarIndex | None = None) -> Path:
    """Write ``model`` in LP format plus a ``.map`` sidecar; returns the map path."""
    path = Path(path)
    text, cols, rows = format_lp(model)
    path.write_text(text, encoding="utf-8")
    return _write_map(path, model, cols, rows, index)


def export_mps(model: Model, path: str | Path, index: VarIndex | None = None) -> Path:
    """Write ``model`` in fixed MPS plus a ``.map`` sidecar; returns the map path."""
    path = Path(path)
    text, cols, rows = format_mps(model)
    path.write_text(text, encoding="utf-8")
    return _write_map(path, model, cols, rows, index)
