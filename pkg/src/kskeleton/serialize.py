"""JSON input formats, deterministic report output and factor dumps.

Symbol file::

    {"coeffs": [{"m": 1, "re": 1.0, "im": 0.0}, ...]}

Operator file::

    {"symbol": <symbol file>, "correction": [{"i": 0, "j": 0, "re": 0.1, "im": 0.0}, ...]}

An operator file may carry ``"half_line": true``; the operator is then
compressed to ``pH`` (used for dilations of non-unitary partial isometries
such as the unilateral shift).
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .errors import InputError
from .factorize import BlockDiagonalOp, LowRankOperator, SkeletonFactorization
from .operators import CorrectedLaurentOp, HardyProjection, SparseFinite, TruncationWindow
from .symbol import LaurentSymbol

__all__ = [
    "dumps",
    "write_json",
    "symbol_from_json",
    "symbol_to_json",
    "operator_from_json",
    "operator_to_json",
    "load_symbol",
    "load_operator",
    "factor_dump",
    "factor_from_dump",
    "load_factor_dump",
]

FLOAT_FORMAT = ".17g"


def _encode(obj, indent: int, level: int) -> str:
    pad = "\n" + " " * (indent * (level + 1))
    end = "\n" + " " * (indent * level)
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v):
            return "NaN"
        if math.isinf(v):
            return "Infinity" if v > 0 else "-Infinity"
        return format(v, FLOAT_FORMAT)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [json.dumps(str(k)) + ": " + _encode(v, indent, level + 1) for k, v in obj.items()]
        return "{" + pad + ("," + pad).join(items) + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if len(obj) == 0:
            return "[]"
        items = [_encode(v, indent, level + 1) for v in obj]
        return "[" + pad + ("," + pad).join(items) + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent: int = 2) -> str:
    """JSON text with every float written to 17 significant digits.

    Key order is insertion order, so equal inputs give equal bytes.
    """
    return _encode(obj, indent, 0) + "\n"


def write_json(obj, path) -> None:
    Path(path).write_text(dumps(obj))


def _read(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror or exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise InputError(f"{path}: top level must be a JSON object")
    return data


def _number(rec: dict, key: str, where: str, default=None) -> float:
    v = rec.get(key, default)
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise InputError(f"{where}: field {key!r} must be a number")
    if not math.isfinite(v):
        raise InputError(f"{where}: field {key!r} must be finite")
    return float(v)


def _integer(rec: dict, key: str, where: str) -> int:
    v = rec.get(key)
    if isinstance(v, bool) or not isinstance(v, int):
        raise InputError(f"{where}: field {key!r} must be an integer")
    return v


def symbol_from_json(data: dict) -> LaurentSymbol:
    coeffs = data.get("coeffs") if isinstance(data, dict) else None
    if not isinstance(coeffs, list):
        raise InputError("symbol: 'coeffs' must be a list")
    out = {}
    for k, rec in enumerate(coeffs):
        where = f"symbol coeffs[{k}]"
        if not isinstance(rec, dict):
            raise InputError(f"{where}: expected an object")
        m = _integer(rec, "m", where)
        if m in out:
            raise InputError(f"{where}: duplicate offset {m}")
        out[m] = complex(_number(rec, "re", where, 0.0), _number(rec, "im", where, 0.0))
    return LaurentSymbol.from_coeffs(out)


def symbol_to_json(f: LaurentSymbol) -> dict:
    return {
        "coeffs": [
            {"m": m, "re": float(c.real), "im": float(c.imag)} for m, c in sorted(f.coeffs.items())
        ]
    }


def operator_from_json(data: dict) -> CorrectedLaurentOp:
    if not isinstance(data, dict) or "symbol" not in data:
        raise InputError("operator: missing 'symbol'")
    f = symbol_from_json(data["symbol"])
    corr = data.get("correction", [])
    if not isinstance(corr, list):
        raise InputError("operator: 'correction' must be a list")
    entries = {}
    for k, rec in enumerate(corr):
        where = f"operator correction[{k}]"
        if not isinstance(rec, dict):
            raise InputError(f"{where}: expected an object")
        ij = (_integer(rec, "i", where), _integer(rec, "j", where))
        if ij in entries:
            raise InputError(f"{where}: duplicate entry {ij}")
        entries[ij] = complex(_number(rec, "re", where, 0.0), _number(rec, "im", where, 0.0))
    return CorrectedLaurentOp(f, SparseFinite.from_dict(entries))


def operator_to_json(x: CorrectedLaurentOp) -> dict:
    return {
        "symbol": symbol_to_json(x.symbol),
        "correction": [
            {"i": i, "j": j, "re": float(v.real), "im": float(v.imag)} for i, j, v in x.correction
        ],
    }


def load_symbol(path) -> LaurentSymbol:
    return symbol_from_json(_read(path))


def load_operator(path) -> tuple:
    """Returns ``(operator, half_line)``."""
    data = _read(path)
    half = data.get("half_line", False)
    if not isinstance(half, bool):
        raise InputError(f"{path}: 'half_line' must be true or false")
    return operator_from_json(data), half


def factor_dump(fact: SkeletonFactorization) -> dict:
    """Everything needed to rebuild the factorization without re-solving."""
    k = fact.k
    return {
        "form": "skeleton",
        "n": fact.n,
        "cut": fact.p.cut,
        "window": {"N": fact.window.N, "pad": fact.window.pad},
        "residual": fact.residual,
        "xp": operator_to_json(fact.xp.op),
        "k": {
            "rows": list(k.rows),
            "start": k.start,
            "re": k.right.real.tolist(),
            "im": k.right.imag.tolist(),
        },
    }


def factor_from_dump(data: dict) -> SkeletonFactorization:
    try:
        if data.get("form", "skeleton") != "skeleton":
            raise InputError("factor dump: only skeleton dumps can be verified")
        n = _integer(data, "n", "factor dump")
        cut = _integer(data, "cut", "factor dump")
        win = data["window"]
        w = TruncationWindow(_integer(win, "N", "window"), _integer(win, "pad", "window"))
        D = operator_from_json(data["xp"])
        kd = data["k"]
        rows = tuple(int(i) for i in kd["rows"])
        right = np.asarray(kd["re"], dtype=float) + 1j * np.asarray(kd["im"], dtype=float)
        if rows:
            if right.ndim != 2 or right.shape[0] != len(rows):
                raise InputError("factor dump: k has inconsistent shape")
        else:
            right = np.zeros((0, 0), dtype=complex)
        k = LowRankOperator(rows, _integer(kd, "start", "k"), right)
        residual = _number(data, "residual", "factor dump", 0.0)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, InputError):
            raise
        raise InputError(f"factor dump: {exc}") from exc
    p = HardyProjection(cut)
    return SkeletonFactorization(n, k, BlockDiagonalOp(D, p), residual, w, p)


def load_factor_dump(path) -> SkeletonFactorization:
    return factor_from_dump(_read(path))
