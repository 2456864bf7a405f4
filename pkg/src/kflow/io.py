"""JSON reading and writing of algebras and reports."""

import json
from pathlib import Path

import jsonschema
import numpy as np

from .algebra import MetricLieAlgebra
from .config import DEFAULT_TOL
from .errors import SchemaError

_NUMBER = {
    "oneOf": [
        {"type": "number"},
        {
            "type": "object",
            "properties": {"re": {"type": "number"}, "im": {"type": "number"}},
            "additionalProperties": False,
        },
    ]
}

ALGEBRA_SCHEMA = {
    "type": "object",
    "required": ["field", "dim", "brackets"],
    "properties": {
        "field": {"enum": ["real", "complex"]},
        "dim": {"type": "integer", "minimum": 1},
        "label": {"type": "string"},
        "brackets": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["i", "j", "k"],
                "properties": {
                    "i": {"type": "integer", "minimum": 1},
                    "j": {"type": "integer", "minimum": 1},
                    "k": {"type": "integer", "minimum": 1},
                    "re": {"type": "number"},
                    "im": {"type": "number"},
                },
            },
        },
        "gram": {"type": "array", "items": {"type": "array", "items": _NUMBER}},
        "nilradical_override": {"type": "array", "items": {"type": "array", "items": _NUMBER}},
    },
}


def _scalar(x):
    if isinstance(x, dict):
        return complex(x.get("re", 0.0), x.get("im", 0.0))
    return x


def parse_algebra(doc, tol=DEFAULT_TOL):
    """Build a validated :class:`MetricLieAlgebra` from a decoded JSON document."""
    try:
        jsonschema.validate(doc, ALGEBRA_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise SchemaError(exc.message) from exc
    n = doc["dim"]
    complex_field = doc["field"] == "complex"
    mu = np.zeros((n, n, n), dtype=complex if complex_field else float)
    for b in doc["brackets"]:
        i, j, k = b["i"] - 1, b["j"] - 1, b["k"] - 1
        if not (i < j < n and k < n):
            raise SchemaError(f"bracket entry needs i < j <= dim and k <= dim: {b}")
        val = complex(b.get("re", 0.0), b.get("im", 0.0))
        if not complex_field:
            if val.imag:
                raise SchemaError("imaginary bracket coefficient in a real algebra")
            val = val.real
        mu[i, j, k] += val
        mu[j, i, k] -= val
    if "gram" in doc:
        gram = np.array([[_scalar(x) for x in row] for row in doc["gram"]])
        if gram.shape != (n, n):
            raise SchemaError(f"gram has shape {gram.shape}, expected {(n, n)}")
    else:
        gram = np.eye(n)
    override = None
    if "nilradical_override" in doc:
        vecs = np.array([[_scalar(x) for x in row] for row in doc["nilradical_override"]])
        if vecs.size and vecs.shape[1] != n:
            raise SchemaError("nilradical_override vectors must have length dim")
        override = vecs.T if vecs.size else np.zeros((n, 0))
    return MetricLieAlgebra(mu, gram, doc["field"], doc.get("label", ""), override, tol)


def load_algebra(source, tol=DEFAULT_TOL):
    """Load an algebra from a path, a JSON string or an already decoded dict."""
    if isinstance(source, dict):
        return parse_algebra(source, tol)
    if isinstance(source, Path) or (isinstance(source, str) and not source.lstrip().startswith("{")):
        text = Path(source).read_text()
    else:
        text = source
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc}") from exc
    return parse_algebra(doc, tol)


def _num(x, complex_field):
    if complex_field:
        return {"re": float(np.real(x)), "im": float(np.imag(x))}
    return float(np.real(x))


def algebra_to_dict(a):
    n = a.dim
    cplx = a.is_complex
    brackets = []
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(n):
                v = a.mu[i, j, k]
                if v != 0:
                    entry = {"i": i + 1, "j": j + 1, "k": k + 1, "re": float(np.real(v))}
                    if cplx:
                        entry["im"] = float(np.imag(v))
                    brackets.append(entry)
    doc = {
        "field": a.field,
        "dim": n,
        "label": a.label,
        "brackets": brackets,
        "gram": [[_num(x, cplx) for x in row] for row in a.gram],
    }
    if a.nilradical_override is not None:
        doc["nilradical_override"] = [[_num(x, cplx) for x in col] for col in a.nilradical_override.T]
    return doc


def encode(arr):
    """JSON-friendly encoding: plain nested lists, or ``{"re", "im"}`` for complex data."""
    arr = np.asarray(arr)
    if np.iscomplexobj(arr):
        if not np.any(arr.imag):
            return np.real(arr).tolist()
        return {"re": np.real(arr).tolist(), "im": np.imag(arr).tolist()}
    return arr.tolist()


def dumps(obj):
    return json.dumps(obj, sort_keys=True, indent=2, default=_default)


def _default(o):
    if isinstance(o, np.ndarray):
        return encode(o)
    if isinstance(o, (np.floating, np.integer, np.bool_)):
        return o.item()
    if isinstance(o, complex):
        return {"re": o.real, "im": o.imag}
    raise TypeError(f"cannot serialise {type(o).__name__}")
