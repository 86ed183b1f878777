"""Deterministic CSV / JSON writers for the command-line tables.

Floats are written with 17 significant digits in CSV and with Python's
round-trip ``repr`` in JSON, so equal inputs give byte-identical files.
"""
from __future__ import annotations

import csv
import io
import json
import math
import sys

__all__ = ["SCHEMA_VERSION", "LEGENDS", "format_value", "to_csv", "to_json", "write_output"]

SCHEMA_VERSION = 1

# column legends per table; the order here is the column order on disk
LEGENDS = {
    "verify": {
        "check": "name of the identity being checked",
        "residual": "measured residual (absolute unless the name says rel)",
        "tolerance": "threshold the residual is compared against",
        "passed": "1 if residual <= tolerance",
        "note": "reason a check was skipped, or a diagnostic",
    },
    "wedge-scan": {
        "r": "modulus of lambda",
        "phi": "argument of lambda in radians",
        "abs_ev1": "largest |eigenvalue| of the reduced auxiliary transfer matrix at (lambda, lambda)",
        "abs_ev2": "second largest",
        "abs_ev3": "third",
        "abs_ev4": "fourth",
        "abs_ev5": "fifth",
        "abs_ev6": "smallest",
        "abs_tau": "|tau(lambda)| = |Lambda_s(lambda)|^2",
        "leading": "1 if |tau| >= (1 - 1e-10) * spectral radius",
        "observable": "1 - |tau| / spectral radius (zero inside the wedge)",
        "predicted": "1 if lambda lies in the analytic wedge",
        "error": "eigensolver failure message, empty otherwise",
    },
    "kernel-check": {
        "lambda_re": "real part of lambda",
        "lambda_im": "imaginary part of lambda",
        "n_half": "number of two-site cells N",
        "norm2": "brute-force ||X(lambda)||^2_HS",
        "norm2_aux": "same quantity from traces of 16 x 16 auxiliary matrices",
        "n_kernel": "N * K(lambda, lambda) from the closed form",
        "abs_diff": "|norm2 - n_kernel|",
        "kernel_aux": "K(lambda, lambda) from auxiliary-matrix derivatives",
        "in_wedge": "1 if lambda lies in the wedge (0 rows carry no convergence claim)",
    },
    "dynamics": {
        "step": "time step t",
        "closed_vs_conj": "max_j ||w_j(t) closed form - U^-t w_j U^t||_F",
        "i_even": "||I_even(t) - I_even(0)||_F",
        "i_odd": "||I_odd(t) - I_odd(0)||_F",
        "transfer": "max over sampled lambda of ||U^-1 T(lambda) U - T(lambda)||_F",
        "unitarity": "||U^dag U - 1||_F",
    },
}


def format_value(x) -> str:
    if hasattr(x, "item"):
        x = x.item()
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        return format(x, ".17g")
    if x is None:
        return ""
    return str(x)


def _jsonable(x):
    if isinstance(x, complex):
        return [x.real, x.imag]
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if hasattr(x, "item"):
        return _jsonable(x.item())
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    return x


def to_csv(table: str, rows: list[dict]) -> str:
    """CSV with a ``# table schema_version`` line and a header row."""
    cols = list(LEGENDS[table])
    buf = io.StringIO()
    buf.write(f"# {table} schema_version={SCHEMA_VERSION}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(cols)
    for row in rows:
        writer.writerow([format_value(row.get(c)) for c in cols])
    return buf.getvalue()


def to_json(table: str, config: dict, rows: list[dict], extra: dict | None = None) -> str:
    """``{"config", "schema_version", "table", "rows"}`` plus any extra fields."""
    doc = {"config": _jsonable(config), "schema_version": SCHEMA_VERSION, "table": table,
           "rows": _jsonable(rows)}
    if extra:
        doc.update(_jsonable(extra))
    return json.dumps(doc, indent=1, sort_keys=False) + "\n"


def write_output(text: str, path: str | None, stream=None):
    if path in (None, "", "-"):
        (stream or sys.stdout).write(text)
        return
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
