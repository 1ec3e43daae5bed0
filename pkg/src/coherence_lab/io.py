"""JSON (de)serialisation of matrices, Kraus sets and result objects.

Square matrices use ``{"dim": d, "entries": [[re, im], ...]}`` in row-major
order. Rectangular matrices (Kraus operators between spaces of different
dimension) use ``{"rows": r, "cols": c, "entries": [...]}``. A Kraus set is
``{"operators": [matrix, ...]}`` with optional ``"output_bases"``.
"""

from __future__ import annotations

import json
import math
from numbers import Real
from pathlib import Path

import numpy as np

from .errors import ParseError

SIG_DIGITS = 12


def round_sig(x: float, digits: int = SIG_DIGITS) -> float:
    x = float(x)
    if x == 0.0 or not math.isfinite(x):
        return x
    return float(f"{x:.{digits}g}")


def to_plain(obj, digits: int | None = None):
    """Recursively convert numpy scalars/arrays to JSON-ready Python values.

    Complex numbers become ``[re, im]``; non-finite floats become ``None``.
    With ``digits`` set, floats are rounded to that many significant digits.
    """
    if isinstance(obj, dict):
        return {str(k): to_plain(v, digits) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_plain(v, digits) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_plain(obj.tolist(), digits)
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [to_plain(obj.real, digits), to_plain(obj.imag, digits)]
    if isinstance(obj, Real):
        x = float(obj)
        if not math.isfinite(x):
            return None
        return round_sig(x, digits) if digits else x
    return obj


def dumps(obj, digits: int | None = SIG_DIGITS) -> str:
    return json.dumps(to_plain(obj, digits), indent=2, sort_keys=True)


# -- matrices --------------------------------------------------------------------


def _entry(x, where: str) -> complex:
    if isinstance(x, (int, float)) and not isinstance(x, bool):
        return complex(x)
    if (
        isinstance(x, list)
        and len(x) == 2
        and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in x)
    ):
        return complex(x[0], x[1])
    raise ParseError(f"{where}: expected [re, im], got {x!r}")


def _positive_int(obj: dict, key: str) -> int:
    v = obj.get(key)
    if not isinstance(v, int) or isinstance(v, bool) or v < 1:
        raise ParseError(f"'{key}' must be a positive integer, got {v!r}")
    return v


def matrix_from_obj(obj) -> np.ndarray:
    if not isinstance(obj, dict) or "entries" not in obj:
        raise ParseError("matrix object needs 'entries' and either 'dim' or 'rows'/'cols'")
    if "dim" in obj:
        rows = cols = _positive_int(obj, "dim")
    else:
        rows, cols = _positive_int(obj, "rows"), _positive_int(obj, "cols")
    entries = obj["entries"]
    if not isinstance(entries, list):
        raise ParseError("'entries' must be a list")
    if len(entries) != rows * cols:
        raise ParseError(f"expected {rows * cols} entries for a {rows}x{cols} matrix, got {len(entries)}")
    vals = [_entry(e, f"entry {i}") for i, e in enumerate(entries)]
    m = np.array(vals, dtype=complex).reshape(rows, cols)
    if not np.all(np.isfinite(m)):
        raise ParseError("matrix entries must be finite")
    return m


def matrix_to_obj(m) -> dict:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-D array, got shape {m.shape}")
    entries = [[float(z.real), float(z.imag)] for z in m.ravel()]
    if m.shape[0] == m.shape[1]:
        return {"dim": m.shape[0], "entries": entries}
    return {"rows": m.shape[0], "cols": m.shape[1], "entries": entries}


def _loads(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from exc


def parse_matrix(text: str) -> np.ndarray:
    return matrix_from_obj(_loads(text))


def dump_matrix(m) -> str:
    return json.dumps(matrix_to_obj(m))


def read_matrix(path) -> np.ndarray:
    return parse_matrix(Path(path).read_text())


# -- Kraus sets ------------------------------------------------------------------


def kraus_from_obj(obj):
    from .channels import KrausSet
    from .coherence import ReferenceBasis

    if isinstance(obj, list):
        obj = {"operators": obj}
    if not isinstance(obj, dict) or not isinstance(obj.get("operators"), list) or not obj["operators"]:
        raise ParseError("Kraus object needs a non-empty 'operators' list")
    ops = [matrix_from_obj(o) for o in obj["operators"]]
    bases = obj.get("output_bases")
    if bases is not None:
        if not isinstance(bases, list) or len(bases) != len(ops):
            raise ParseError("'output_bases' must list one unitary per operator")
        bases = [ReferenceBasis(matrix_from_obj(b)) for b in bases]
    return KrausSet(ops, bases)


def kraus_to_obj(kraus) -> dict:
    out = {"operators": [matrix_to_obj(k) for k in kraus.operators]}
    if kraus.output_bases is not None and not all(b.is_identity for b in kraus.output_bases):
        out["output_bases"] = [matrix_to_obj(b.unitary) for b in kraus.output_bases]
    return out


def parse_kraus(text: str):
    return kraus_from_obj(_loads(text))


def dump_kraus(kraus) -> str:
    return json.dumps(kraus_to_obj(kraus))


def read_kraus(path):
    return parse_kraus(Path(path).read_text())
