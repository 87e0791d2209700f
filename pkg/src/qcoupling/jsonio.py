"""JSON input/output for matrices, states, subspaces, distributions, relations.

Matrix objects carry "re" (nested rows) and optionally "im"; "dim" or
"rows"/"cols" may pin the expected shape. Distributions are {"weights":
[...]} for floats or {"num": [...], "den": [...]} for exact rationals.
Subspaces are {"projector": <matrix>} or {"span": [<vector>, ...]} where a
vector is either a plain number array or {"re": [...], "im": [...]}.
Emitted floats use Python's shortest round-trip representation, so
re-parsing reproduces every value exactly; NaN and infinities are rejected
on both paths.
"""

from __future__ import annotations

import json
from fractions import Fraction

import numpy as np

from . import classical, linalg
from .classical import ClassicalVerdict, Relation
from .errors import InputError
from .quantum import DensityOperator
from .reduction import EmbeddingReport
from .sdp import LiftingVerdict


def _reject_constant(token):
    raise InputError(f"non-finite JSON value {token!r} is not allowed")


def loads(text: str):
    """Parse JSON text; malformed input raises InputError with the position."""
    try:
        return json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise InputError(
            f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}"
        ) from exc


def load_file(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from exc
    try:
        return loads(text)
    except InputError as exc:
        raise InputError(f"{path}: {exc}") from exc


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False)


def _numeric_rows(obj, label: str) -> np.ndarray:
    if not isinstance(obj, list) or not obj:
        raise InputError(f'"{label}" must be a non-empty array of rows')
    try:
        arr = np.array(obj, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise InputError(f'"{label}" rows must be numeric and rectangular') from exc
    if arr.ndim != 2:
        raise InputError(f'"{label}" must be a nested array of rows')
    if not np.all(np.isfinite(arr)):
        raise InputError(f'"{label}" entries must be finite')
    return arr


def parse_matrix(obj) -> np.ndarray:
    """Read a complex square matrix from its JSON object form."""
    if not isinstance(obj, dict):
        raise InputError("matrix must be a JSON object with a \"re\" field")
    if "re" not in obj:
        raise InputError('matrix object is missing "re"')
    re_part = _numeric_rows(obj["re"], "re")
    if "im" in obj:
        im_part = _numeric_rows(obj["im"], "im")
        if im_part.shape != re_part.shape:
            raise InputError('"im" shape differs from "re"')
    else:
        im_part = np.zeros_like(re_part)
    rows, cols = re_part.shape
    for key, want in (("dim", rows), ("rows", rows), ("cols", cols)):
        if key in obj and obj[key] != want:
            raise InputError(f'"{key}": {obj[key]} does not match data shape {want}')
    if rows != cols:
        raise InputError(f"matrix must be square, got {rows}x{cols}")
    return re_part + 1j * im_part


def matrix_to_json(m: np.ndarray) -> dict:
    m = np.asarray(m, dtype=np.complex128)
    out = {"dim": int(m.shape[0]), "re": m.real.tolist()}
    if np.any(m.imag):
        out["im"] = m.imag.tolist()
    return out


def parse_density(obj) -> DensityOperator:
    """Matrix JSON to a state; "trace_check": true additionally demands tr = 1."""
    rho = DensityOperator(parse_matrix(obj))
    if isinstance(obj, dict) and obj.get("trace_check"):
        if abs(rho.trace - 1.0) > 1e-9:
            raise InputError(f"trace_check requested but tr = {rho.trace:.12g} != 1")
    return rho


def _parse_vector(obj) -> np.ndarray:
    if isinstance(obj, dict):
        re_part = obj.get("re")
        if not isinstance(re_part, list):
            raise InputError('span vector object needs a numeric "re" array')
        re_arr = np.array(re_part, dtype=np.float64)
        im = obj.get("im")
        im_arr = (
            np.array(im, dtype=np.float64) if im is not None else np.zeros_like(re_arr)
        )
        if im_arr.shape != re_arr.shape:
            raise InputError('span vector "im" length differs from "re"')
        vec = re_arr + 1j * im_arr
    else:
        try:
            vec = np.array(obj, dtype=np.complex128)
        except (TypeError, ValueError) as exc:
            raise InputError("span vector must be a number array") from exc
    if vec.ndim != 1 or not np.all(np.isfinite(vec)):
        raise InputError("span vectors must be flat arrays of finite numbers")
    return vec


def parse_subspace(obj, expected_dim: int | None = None) -> linalg.Subspace:
    if not isinstance(obj, dict):
        raise InputError('subspace must be {"projector": ...} or {"span": [...]}')
    if ("projector" in obj) == ("span" in obj):
        raise InputError('subspace needs exactly one of "projector" or "span"')
    if "projector" in obj:
        sub = linalg.Subspace.from_projector(parse_matrix(obj["projector"]))
    else:
        vecs = obj["span"]
        if not isinstance(vecs, list) or not vecs:
            raise InputError('"span" must be a non-empty array of vectors')
        sub = linalg.Subspace.from_span([_parse_vector(v) for v in vecs])
    if expected_dim is not None and sub.ambient_dim != expected_dim:
        raise InputError(
            f"subspace ambient dim {sub.ambient_dim} != expected {expected_dim}"
        )
    return sub


def parse_distribution(obj) -> list:
    """{"weights": [...]} as floats, or {"num": [...], "den": [...]} as Fractions."""
    if not isinstance(obj, dict):
        raise InputError('distribution must be {"weights": ...} or {"num"/"den": ...}')
    if "weights" in obj:
        weights = obj["weights"]
        if not isinstance(weights, list):
            raise InputError('"weights" must be an array')
        try:
            floats = [float(w) for w in weights]
        except (TypeError, ValueError) as exc:
            raise InputError('"weights" entries must be numbers') from exc
        return classical.check_subdistribution(floats)
    if "num" in obj or "den" in obj:
        num, den = obj.get("num"), obj.get("den")
        if not (isinstance(num, list) and isinstance(den, list)) or len(num) != len(den):
            raise InputError('"num" and "den" must be integer arrays of equal length')
        out = []
        for k, (a, b) in enumerate(zip(num, den)):
            if not isinstance(a, int) or not isinstance(b, int):
                raise InputError(f"num/den entries must be integers (index {k})")
            if b == 0:
                raise InputError(f"zero denominator at index {k}")
            out.append(Fraction(a, b))
        return classical.check_subdistribution(out)
    raise InputError('distribution needs "weights" or "num"/"den"')


def parse_relation(obj) -> Relation:
    if not isinstance(obj, dict):
        raise InputError('relation must be {"m": ..., "n": ..., "pairs": [...]}')
    for key in ("m", "n", "pairs"):
        if key not in obj:
            raise InputError(f'relation is missing "{key}"')
    m, n, pairs = obj["m"], obj["n"], obj["pairs"]
    if not isinstance(m, int) or not isinstance(n, int):
        raise InputError('"m" and "n" must be integers')
    if not isinstance(pairs, list):
        raise InputError('"pairs" must be an array of [i, j] pairs')
    cleaned = []
    for k, p in enumerate(pairs):
        if (
            not isinstance(p, list)
            or len(p) != 2
            or not all(isinstance(c, int) for c in p)
        ):
            raise InputError(f'"pairs"[{k}] must be an integer pair [i, j]')
        cleaned.append((p[0], p[1]))
    return Relation.from_pairs(m, n, cleaned)


def verdict_to_json(verdict: LiftingVerdict) -> dict:
    sol = verdict.diagnostics
    out = {
        "verdict": "exists" if verdict.exists else "not_exists",
        "primal_value": sol.primal_value,
        "dual_value": sol.dual_value,
        "gap": sol.gap,
        "iterations": sol.iterations,
    }
    if verdict.exists:
        out["witness"] = matrix_to_json(verdict.witness.mat)
    else:
        y1, y2 = verdict.certificate
        out["certificate"] = {"y1": matrix_to_json(y1), "y2": matrix_to_json(y2)}
    return out


def classical_verdict_to_json(verdict: ClassicalVerdict) -> dict:
    if verdict.exists:
        return {
            "verdict": "exists",
            "witness": [[float(w) for w in row] for row in verdict.witness],
        }
    return {
        "verdict": "not_exists",
        "violating_set": sorted(verdict.violating),
    }


def report_to_json(report: EmbeddingReport) -> dict:
    return {
        "classical_verdict": report.classical_verdict,
        "quantum_verdict": report.quantum_verdict,
        "witness_roundtrip_error": report.witness_roundtrip_error,
        "agreement": report.agreement,
    }
