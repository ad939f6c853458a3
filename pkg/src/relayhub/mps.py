"""Fixed-format MPS writer and reader for :class:`MilpInstance`."""

from __future__ import annotations

import math

import numpy as np
import scipy.sparse as sp

from .model import MilpInstance

OBJ_ROW = "COST"
RHS_NAME = "RHS"
BND_NAME = "BND"
_SENSE_TO_MPS = {"L": "L", "E": "E", "G": "G"}


class MpsParseError(ValueError):
    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


def _num(v: float) -> str:
    """Shortest representation of ``v`` that fits the 12-column field."""
    v = float(v)
    if v == int(v) and abs(v) < 1e11:
        return str(int(v))
    s = repr(v)
    if len(s) <= 12:
        return s
    for digits in range(12, 0, -1):
        s = f"{v:.{digits}g}"
        if len(s) <= 12:
            return s
    raise ValueError(f"cannot fit {v!r} into an MPS number field")


def _line(f1="", f2="", f3="", f4="", f5="", f6="") -> str:
    for name in (f2, f3, f5):
        if len(name) > 8:
            raise ValueError(f"name {name!r} longer than 8 characters")
    s = f" {f1:<2} {f2:<8}  {f3:<8}  {f4:>12}"
    if f5:
        s += f"   {f5:<8}  {f6:>12}"
    return s.rstrip()


def export_mps(instance: MilpInstance, name: str | None = None) -> str:
    name = (name or instance.name)[:8]
    A = sp.csc_matrix(instance.A)
    out = [f"NAME          {name}", "ROWS", _line("N", OBJ_ROW)]
    for rname, sense in zip(instance.row_names, instance.senses):
        out.append(_line(_SENSE_TO_MPS[str(sense)], rname))
    out.append("COLUMNS")
    in_int = False
    marker = 0
    for j, cname in enumerate(instance.col_names):
        is_int = bool(instance.integer[j])
        if is_int != in_int:
            out.append(_line("", f"MARKER{marker:02d}"[:8], "'MARKER'", "", "'INTORG'" if is_int else "'INTEND'"))
            marker += 1
            in_int = is_int
        entries = [(OBJ_ROW, instance.c[j])] if instance.c[j] != 0 else []
        lo, hi = A.indptr[j], A.indptr[j + 1]
        entries += [(instance.row_names[i], v) for i, v in zip(A.indices[lo:hi], A.data[lo:hi])]
        if not entries:
            entries = [(OBJ_ROW, 0.0)]
        for k in range(0, len(entries), 2):
            pair = entries[k : k + 2]
            if len(pair) == 2:
                out.append(_line("", cname, pair[0][0], _num(pair[0][1]), pair[1][0], _num(pair[1][1])))
            else:
                out.append(_line("", cname, pair[0][0], _num(pair[0][1])))
    if in_int:
        out.append(_line("", f"MARKER{marker:02d}"[:8], "'MARKER'", "", "'INTEND'"))
    out.append("RHS")
    for rname, v in zip(instance.row_names, instance.rhs):
        if v != 0:
            out.append(_line("", RHS_NAME, rname, _num(v)))
    out.append("BOUNDS")
    for j, cname in enumerate(instance.col_names):
        lo, hi = float(instance.lb[j]), float(instance.ub[j])
        if lo == hi:
            out.append(_line("FX", BND_NAME, cname, _num(lo)))
            continue
        if math.isinf(lo) and math.isinf(hi):
            out.append(_line("FR", BND_NAME, cname))
            continue
        if math.isinf(lo):
            out.append(_line("MI", BND_NAME, cname))
        elif lo != 0 or instance.integer[j]:
            out.append(_line("LO", BND_NAME, cname, _num(lo)))
        if not math.isinf(hi):
            out.append(_line("UP", BND_NAME, cname, _num(hi)))
        elif instance.integer[j]:
            out.append(_line("PL", BND_NAME, cname))
    out.append("ENDATA")
    return "\n".join(out) + "\n"


def import_mps(text: str) -> MilpInstance:
    """Parse a fixed (or whitespace-separated) MPS document."""
    section = None
    name = "MPS"
    obj_row = None
    row_names: list[str] = []
    row_pos: dict[str, int] = {}
    senses: list[str] = []
    col_names: list[str] = []
    col_pos: dict[str, int] = {}
    integer: list[bool] = []
    entries: list[tuple[int, int, float]] = []
    cost: dict[int, float] = {}
    rhs: dict[int, float] = {}
    bounds: dict[int, list[float]] = {}
    in_int = False
    seen_end = False

    for no, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip() or raw.startswith("*"):
            continue
        if not raw[0].isspace():
            head = raw.split()
            section = head[0].upper()
            if section == "NAME":
                name = head[1] if len(head) > 1 else name
            elif section == "ENDATA":
                seen_end = True
                break
            elif section not in ("ROWS", "COLUMNS", "RHS", "BOUNDS", "RANGES"):
                raise MpsParseError(no, f"unknown section {section!r}")
            if section == "RANGES":
                raise MpsParseError(no, "RANGES section is not supported")
            continue
        tok = raw.split()
        if section == "ROWS":
            if len(tok) != 2 or tok[0].upper() not in ("N", "L", "E", "G"):
                raise MpsParseError(no, f"bad ROWS record {raw.strip()!r}")
            kind, rname = tok[0].upper(), tok[1]
            if kind == "N":
                if obj_row is None:
                    obj_row = rname
                continue
            if rname in row_pos:
                raise MpsParseError(no, f"duplicate row {rname!r}")
            row_pos[rname] = len(row_names)
            row_names.append(rname)
            senses.append(kind)
        elif section == "COLUMNS":
            if len(tok) >= 3 and tok[1].strip("'").upper() == "MARKER":
                flag = tok[-1].strip("'").upper()
                if flag not in ("INTORG", "INTEND"):
                    raise MpsParseError(no, f"bad marker {tok[-1]!r}")
                in_int = flag == "INTORG"
                continue
            if len(tok) not in (3, 5):
                raise MpsParseError(no, f"COLUMNS record needs 3 or 5 fields, got {len(tok)}")
            cname = tok[0]
            if cname not in col_pos:
                col_pos[cname] = len(col_names)
                col_names.append(cname)
                integer.append(in_int)
            j = col_pos[cname]
            for rname, sval in zip(tok[1::2], tok[2::2]):
                val = _parse_float(sval, no)
                if rname == obj_row:
                    cost[j] = cost.get(j, 0.0) + val
                elif rname in row_pos:
                    entries.append((row_pos[rname], j, val))
                else:
                    raise MpsParseError(no, f"unknown row {rname!r}")
        elif section == "RHS":
            if len(tok) not in (3, 5):
                raise MpsParseError(no, f"RHS record needs 3 or 5 fields, got {len(tok)}")
            for rname, sval in zip(tok[1::2], tok[2::2]):
                val = _parse_float(sval, no)
                if rname == obj_row:
                    raise MpsParseError(no, "objective constants are not supported")
                if rname not in row_pos:
                    raise MpsParseError(no, f"unknown row {rname!r}")
                rhs[row_pos[rname]] = val
        elif section == "BOUNDS":
            kind = tok[0].upper()
            if kind in ("FR", "MI", "PL", "BV"):
                if len(tok) not in (3, 4):
                    raise MpsParseError(no, f"bad {kind} bound record")
                cname = tok[2]
                val = None
            else:
                if len(tok) != 4:
                    raise MpsParseError(no, f"bound record needs 4 fields, got {len(tok)}")
                cname, val = tok[2], _parse_float(tok[3], no)
            if cname not in col_pos:
                raise MpsParseError(no, f"unknown column {cname!r}")
            j = col_pos[cname]
            lohi = bounds.setdefault(j, [0.0, math.inf])
            if kind == "UP":
                lohi[1] = val
            elif kind == "LO":
                lohi[0] = val
            elif kind == "FX":
                lohi[0] = lohi[1] = val
            elif kind == "FR":
                lohi[0], lohi[1] = -math.inf, math.inf
            elif kind == "MI":
                lohi[0] = -math.inf
            elif kind == "PL":
                lohi[1] = math.inf
            elif kind == "BV":
                lohi[0], lohi[1] = 0.0, 1.0
                integer[j] = True
            else:
                raise MpsParseError(no, f"unknown bound type {kind!r}")
        else:
            raise MpsParseError(no, "data record outside of a section")
    if not seen_end:
        raise MpsParseError(len(text.splitlines()), "missing ENDATA")

    n, m = len(col_names), len(row_names)
    if entries:
        r, c_, v = zip(*entries)
        A = sp.csr_matrix((v, (r, c_)), shape=(m, n))
    else:
        A = sp.csr_matrix((m, n))
    c = np.zeros(n)
    for j, v in cost.items():
        c[j] = v
    b = np.zeros(m)
    for i, v in rhs.items():
        b[i] = v
    lb = np.zeros(n)
    ub = np.full(n, np.inf)
    for j, (lo, hi) in bounds.items():
        lb[j], ub[j] = lo, hi
    return MilpInstance(
        c=c,
        A=A,
        senses=np.array(senses, dtype="<U1"),
        rhs=b,
        lb=lb,
        ub=ub,
        integer=np.array(integer, dtype=bool),
        name=name,
        col_names=col_names,
        row_names=row_names,
    )


def _parse_float(s: str, no: int) -> float:
    try:
        return float(s)
    except ValueError:
        raise MpsParseError(no, f"bad number {s!r}") from None
