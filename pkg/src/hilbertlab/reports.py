"""Deterministic file emitters: CSV/JSON reports and solution dumps.

No timestamps; floats formatted with %.12g; a fixed seed therefore
reproduces byte-identical outputs on one platform. Existing files are
never overwritten unless force=True.
"""

from __future__ import annotations

import json
import os

import numpy as np

from .errors import SpecParseError


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".12g")


def prepare_output(path, force: bool = False):
    if os.path.exists(path) and not force:
        raise FileExistsError(f"{path} exists; pass force/--force to overwrite")
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)


def write_csv(path, columns, rows, comments=(), force=False):
    prepare_output(path, force)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for c in comments:
            fh.write(f"# {c}\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(fmt(v) for v in row) + "\n")


def write_json_report(path, columns, rows, meta=None, force=False):
    prepare_output(path, force)
    payload = {
        "meta": meta or {},
        "rows": [dict(zip(columns, [None if v is None else
                                    (bool(v) if isinstance(v, (bool, np.bool_)) else
                                     float(v) if isinstance(v, (float, np.floating)) else
                                     int(v) if isinstance(v, (int, np.integer)) else v)
                                    for v in row]))
                 for row in rows],
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)
        fh.write("\n")


def write_report(path, columns, rows, comments=(), meta=None,
                 fmt_kind="csv", force=False):
    if fmt_kind == "json":
        write_json_report(path, columns, rows, meta=meta, force=force)
    else:
        write_csv(path, columns, rows, comments=comments, force=force)


SOLUTION_COLUMNS = ["i", "j", "x", "y", "u", "hB11", "hB12", "hB22", "kappa"]


def write_solution_dump(path, solution, fld=None, force=False):
    """JSON header line ('#% ...') followed by the node CSV body."""
    prepare_output(path, force)
    g = solution.grid
    header = {
        "domain": solution.domain.to_spec(),
        "grid_n": g.n,
        "spacing": g.h,
        "residual_sup": solution.residual_sup,
        "iterations": solution.iterations,
        "band_width": solution.band_width,
    }
    ij = np.argwhere(g.inside)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("#% " + json.dumps(header, sort_keys=True) + "\n")
        fh.write(",".join(SOLUTION_COLUMNS) + "\n")
        for i, j in ij:
            row = [int(i), int(j), g.X[i, j], g.Y[i, j], solution.u[i, j]]
            if fld is not None and fld.mask[i, j]:
                row += [fld.hb[i, j, 0], fld.hb[i, j, 1], fld.hb[i, j, 2]]
                row.append(fld.kappa[i, j] if fld.kappa_mask[i, j] else None)
            else:
                row += [None, None, None, None]
            fh.write(",".join(fmt(v) for v in row) + "\n")


def read_solution_dump(path):
    """Parse a dump back into {'header': dict, 'rows': structured array}."""
    with open(path, "r", encoding="utf-8") as fh:
        first = fh.readline()
        if not first.startswith("#% "):
            raise SpecParseError(f"{path} is not a solution dump")
        header = json.loads(first[3:])
        cols = fh.readline().strip().split(",")
        rows = []
        for line in fh:
            parts = line.rstrip("\n").split(",")
            rows.append([float(p) if p else np.nan for p in parts])
    arr = np.array(rows)
    return {"header": header, "columns": cols, "data": arr}
