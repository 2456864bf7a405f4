"""Built-in metric Lie algebras and the verification pipeline run on them."""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .algebra import MetricLieAlgebra, orthogonal_decomposition
from .config import DEFAULT_TOL
from .curvature import curvature_report
from .errors import KFlowError, UnknownEntry, ZeroBracket
from .io import algebra_to_dict, encode
from .soliton import SEMI, solve_soliton, verify_structure
from .stratify import compute_beta, stratum_checks

CERTIFIED_IN_PAPER = "certified_in_paper"
OPEN = "open"
AUXILIARY = "auxiliary"

EXIT_OK, EXIT_ERROR, EXIT_REJECTED, EXIT_INCONCLUSIVE = 0, 1, 2, 3


def structure_constants(n, brackets, complex_field=False):
    """Antisymmetric ``mu`` from ``(i, j, k, value)`` with 1-based ``i < j``."""
    mu = np.zeros((n, n, n), dtype=complex if complex_field else float)
    for i, j, k, v in brackets:
        mu[i - 1, j - 1, k - 1] += v
        mu[j - 1, i - 1, k - 1] -= v
    return mu


def _nonzero(name, value):
    if value == 0:
        raise ValueError(f"parameter {name} must be nonzero")


def _positive(name, value):
    if np.imag(value) != 0 or np.real(value) <= 0:
        raise ValueError(f"parameter {name} must be a positive real number")


@dataclass(frozen=True)
class Param:
    default: complex
    kind: str = "complex"  # complex | positive

    def coerce(self, name, value):
        value = complex(value)
        if self.kind == "positive":
            _positive(name, value)
            return float(value.real)
        return value


def _s31(p, q, r, s):
    _nonzero("p", p)
    br = [(1, 2, 2, p), (1, 2, 3, q), (1, 2, 4, r), (1, 3, 3, -p), (1, 3, 4, s)]
    return MetricLieAlgebra(structure_constants(4, br, True), np.eye(4), "complex", "s31C")


def _g1(p, q, r, s, t, u):
    for name, v in (("p", p), ("s", s), ("u", u)):
        _nonzero(name, v)
    if abs(p + s + u) > 1e-12:
        raise ValueError("g_1(-2) requires p + s + u = 0")
    br = [(1, 2, 2, p), (1, 2, 3, q), (1, 2, 4, r), (1, 3, 3, s), (1, 3, 4, t), (1, 4, 4, u)]
    return MetricLieAlgebra(structure_constants(4, br, True), np.eye(4), "complex", "g_1(-2)")


def _g4(p, q, r):
    br = [(1, 2, 3, p), (1, 3, 4, q), (1, 4, 2, r)]
    return MetricLieAlgebra(structure_constants(4, br, True), np.eye(4), "complex", "g_4")


def _g7(z1, zn):
    br = [(1, 2, 3, 1), (1, 3, 2, 1), (2, 3, 4, 1)]
    gram = np.diag([z1, zn, zn, zn]).astype(complex)
    return MetricLieAlgebra(structure_constants(4, br, True), gram, "complex", "g_7")


def _g3(alpha):
    _nonzero("alpha", alpha)
    br = [(1, 2, 3, 1), (1, 3, 4, 1), (1, 4, 2, alpha), (1, 4, 3, alpha)]
    return MetricLieAlgebra(structure_constants(4, br, True), np.eye(4), "complex", "g_3(alpha)")


def _heisenberg(complex_field):
    def make():
        mu = structure_constants(3, [(1, 2, 3, 1)], complex_field)
        label = "heisenberg_complex" if complex_field else "heisenberg_real"
        return MetricLieAlgebra(mu, np.eye(3), "complex" if complex_field else "real", label)

    return make


def _sl2():
    # basis H, E, F with the metric -B(X, theta Y) from the Killing form
    br = [(1, 2, 2, 2), (1, 3, 3, -2), (2, 3, 1, 1)]
    gram = np.diag([8.0, 4.0, 4.0]).astype(complex)
    return MetricLieAlgebra(structure_constants(3, br, True), gram, "complex", "sl2C")


def _filiform():
    mu = structure_constants(4, [(1, 2, 3, 1), (1, 3, 4, 1)])
    return MetricLieAlgebra(mu, np.eye(4), "real", "filiform_n4")


def _exp_s31(v):
    p2 = abs(v["p"]) ** 2
    return -p2, np.diag([0, p2, p2, p2])


def _exp_g1(v):
    c = -(abs(v["p"]) ** 2 + abs(v["s"]) ** 2 + abs(v["u"]) ** 2) / 2
    return c, -np.diag([0, c, c, c])


def _exp_g4(v):
    p2 = v["p"] ** 2
    return -1.5 * p2, 1.5 * np.diag([0, p2, p2, p2])


def _exp_g7(v):
    # soliton metrics are the diagonal ones with |Z_1|^2 : |Z_k|^2 = 2 : 3
    if abs(v["zn"] - 1.5 * v["z1"]) > 1e-12 * v["zn"]:
        return None
    s = 1.0 / v["z1"]
    return -s, s * np.diag([0, 2 / 3, 2 / 3, 4 / 3])


def _exp_heisenberg_real(v):
    return -1.5, np.diag([1.0, 1.0, 2.0])


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    status: str
    factory: Callable
    params: dict = field(default_factory=dict)
    expected: Optional[Callable] = None
    description: str = ""
    constraints: str = ""

    def resolve(self, overrides=None):
        values = {k: p.coerce(k, p.default) for k, p in self.params.items()}
        for k, v in (overrides or {}).items():
            if k not in self.params:
                raise ValueError(f"{self.name} has no parameter {k!r}; known: {sorted(self.params)}")
            values[k] = self.params[k].coerce(k, v)
        return values

    def build(self, overrides=None):
        return self.factory(**self.resolve(overrides))

    def expected_certificate(self, overrides=None):
        if self.expected is None:
            return None
        return self.expected(self.resolve(overrides))


CATALOG = {
    e.name: e
    for e in [
        CatalogEntry(
            "s31C", CERTIFIED_IN_PAPER, _s31,
            {"p": Param(1), "q": Param(0), "r": Param(0), "s": Param(0)},
            _exp_s31,
            "s_{3,-1} + C in a unitary adapted basis: [W1,W2] = pW2 + qW3 + rW4, [W1,W3] = -pW3 + sW4",
            "p != 0; soliton iff q = r = s = 0",
        ),
        CatalogEntry(
            "g_1(-2)", CERTIFIED_IN_PAPER, _g1,
            {"p": Param(1), "q": Param(0), "r": Param(0), "s": Param(1), "t": Param(0), "u": Param(-2)},
            _exp_g1,
            "[W1,W2] = pW2 + qW3 + rW4, [W1,W3] = sW3 + tW4, [W1,W4] = uW4",
            "p + s + u = 0 and p, s, u != 0; soliton iff q = r = t = 0",
        ),
        CatalogEntry(
            "g_4", CERTIFIED_IN_PAPER, _g4,
            {"p": Param(1, "positive"), "q": Param(1, "positive"), "r": Param(1, "positive")},
            lambda v: _exp_g4(v) if v["p"] == v["q"] == v["r"] else None,
            "[W1,W2] = pW3, [W1,W3] = qW4, [W1,W4] = rW2",
            "p, q, r > 0; soliton iff p = q = r",
        ),
        CatalogEntry(
            "g_7", CERTIFIED_IN_PAPER, _g7,
            {"z1": Param(1.0, "positive"), "zn": Param(1.5, "positive")},
            _exp_g7,
            "[Z1,Z2] = Z3, [Z1,Z3] = Z2, [Z2,Z3] = Z4 with gram diag(z1, zn, zn, zn)",
            "z1, zn > 0; soliton iff zn / z1 = 3/2",
        ),
        CatalogEntry(
            "g_3(alpha)", OPEN, _g3, {"alpha": Param(1)}, None,
            "[Z1,Z2] = Z3, [Z1,Z3] = Z4, [Z1,Z4] = alpha (Z2 + Z3), standard metric",
            "alpha != 0; existence of a soliton is open",
        ),
        CatalogEntry(
            "heisenberg_real", AUXILIARY, _heisenberg(False), {}, _exp_heisenberg_real,
            "real Heisenberg algebra h3, [e1,e2] = e3",
        ),
        CatalogEntry(
            "heisenberg_complex", AUXILIARY, _heisenberg(True), {}, None,
            "complex Heisenberg algebra h3(C), [Z1,Z2] = Z3",
        ),
        CatalogEntry(
            "sl2C", AUXILIARY, _sl2, {}, None,
            "sl(2,C) in the basis H, E, F with the Killing-induced metric diag(8, 4, 4)",
        ),
        CatalogEntry(
            "filiform_n4", AUXILIARY, _filiform, {}, None,
            "real filiform algebra n4, [e1,e2] = e3, [e1,e3] = e4",
        ),
    ]
}

ALIASES = {"g_3": "g_3(alpha)", "g_1": "g_1(-2)", "g7": "g_7", "g4": "g_4", "sl2": "sl2C"}


def get_entry(name):
    key = ALIASES.get(name, name)
    if key not in CATALOG:
        raise UnknownEntry(f"unknown catalog entry {name!r}; known: {sorted(CATALOG)}")
    return CATALOG[key]


def catalog_list():
    return [(e.name, e.status) for e in CATALOG.values()]


def show(name, params=None):
    e = get_entry(name)
    values = e.resolve(params)
    return {
        "name": e.name,
        "status": e.status,
        "description": e.description,
        "constraints": e.constraints,
        "params": {k: _jsonable(v) for k, v in values.items()},
        "algebra": algebra_to_dict(e.factory(**values)),
    }


def _jsonable(v):
    if isinstance(v, complex):
        return v.real if v.imag == 0 else {"re": v.real, "im": v.imag}
    return v


def analyze_algebra(a, tol=DEFAULT_TOL, mode=SEMI):
    """Curvature, soliton certificate, structure report and nilradical stratum."""
    out = {"label": a.label, "field": a.field, "dim": a.dim}
    out["curvature"] = curvature_report(a, tol).to_dict()
    cert = solve_soliton(a, mode, tol)
    out["soliton"] = cert.to_dict()
    if cert.certified:
        try:
            out["structure"] = verify_structure(a, cert, tol).to_dict()
        except KFlowError as exc:
            out["structure"] = {"pass": False, "error": f"{type(exc).__name__}: {exc}"}
    else:
        out["structure"] = None
    out["stratum"] = nilradical_stratum(a, tol)
    return cert, out


def nilradical_stratum(a, tol=DEFAULT_TOL):
    """Stratum data of the nilradical bracket in the adapted orthonormal frame."""
    try:
        d = orthogonal_decomposition(a, tol)
        return stratum_checks(compute_beta(d.mu_n, tol), tol=tol).to_dict()
    except ZeroBracket:
        return {"note": "nilradical is abelian (or zero); beta is undefined"}
    except KFlowError as exc:
        return {"error": f"{type(exc).__name__}: {exc}"}


def _compare(cert, expected, a):
    if expected is None:
        return None
    c_exp, D_exp = expected
    D_sym = 0.5 * (cert.D + a.adjoint(cert.D))
    return {
        "c": float(np.real(c_exp)),
        "D": encode(np.asarray(D_exp)),
        "c_error": float(abs(cert.c - c_exp)),
        "D_error": float(np.linalg.norm(D_sym - D_exp)),
    }


def run_verify(name, params=None, tol=DEFAULT_TOL):
    """Run the full pipeline on a catalog entry; returns ``(exit_code, report)``."""
    entry = get_entry(name)
    values = entry.resolve(params)
    a = entry.factory(**values)
    cert, report = analyze_algebra(a, tol)
    report["entry"] = entry.name
    report["entry_status"] = entry.status
    report["params"] = {k: _jsonable(v) for k, v in values.items()}
    report["expected"] = _compare(cert, entry.expected_certificate(params), a)
    if entry.status == OPEN:
        report["exploratory"] = True
        if cert.certified:
            verdict, code = "certified", EXIT_OK
        else:
            # a failed search is not evidence of nonexistence
            verdict, code = "no certificate found", EXIT_INCONCLUSIVE
    else:
        report["exploratory"] = False
        verdict = cert.status
        code = {"certified": EXIT_OK, "rejected": EXIT_REJECTED}.get(cert.status, EXIT_INCONCLUSIVE)
    report["verdict"] = verdict
    return code, report


def verify_all(tol=DEFAULT_TOL, max_workers=None):
    """Verify every entry with default parameters, concurrently; returns ``{name: (code, report)}``."""
    names = list(CATALOG)

    def one(name):
        try:
            return run_verify(name, tol=tol)
        except KFlowError as exc:
            return EXIT_ERROR, {"entry": name, "error": f"{type(exc).__name__}: {exc}"}

    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        results = list(pool.map(one, names))
    return dict(zip(names, results))
