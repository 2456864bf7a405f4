"""GL(n) action on brackets, the moment map and stratum labels."""

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import _linalg
from .algebra import bracket_norm_sq, derivation_basis
from .config import DEFAULT_TOL
from .curvature import moment_operator_on
from .errors import DimensionMismatch, NoConvergence, PreconditionFailed, ZeroBracket


def pi_apply(E, mu):
    """``pi(E)mu(X, Y) = E mu(X, Y) - mu(EX, Y) - mu(X, EY)``."""
    E = np.asarray(E)
    n = mu.shape[0]
    if E.shape != (n, n):
        raise DimensionMismatch(f"endomorphism {E.shape} vs bracket dimension {n}")
    return (
        np.einsum("kl,ijl->ijk", E, mu)
        - np.einsum("li,ljk->ijk", E, mu)
        - np.einsum("lj,ilk->ijk", E, mu)
    )


def gl_apply(A, mu, max_cond=1e12):
    """``(A . mu)(X, Y) = A mu(A^{-1} X, A^{-1} Y)``."""
    A = np.asarray(A)
    n = mu.shape[0]
    if A.shape != (n, n):
        raise DimensionMismatch(f"matrix {A.shape} vs bracket dimension {n}")
    _linalg.check_invertible(A, max_cond)
    B = np.linalg.inv(A)
    return np.einsum("ai,bj,abc,kc->ijk", B, B, mu, A)


def v_inner(mu, nu, gram=None):
    """Inner product on brackets induced by ``gram`` (default: identity)."""
    if gram is not None:
        P = _linalg.orthonormal_frame(gram)
        Pinv = np.linalg.inv(P)
        mu, nu = gl_apply(Pinv, mu), gl_apply(Pinv, nu)
    val = np.vdot(nu, mu)
    return val if np.iscomplexobj(val) and abs(val.imag) > 0 else float(np.real(val))


def moment_pairing(a, E):
    """Both sides of the moment-map identity for ``(a.mu, a.gram)`` and ``E``.

    ``lhs = tr(E M)`` (equal to ``<M, E> = tr(M E^t)`` for real ``E``),
    ``rhs = <pi(E)mu, mu> / 4``.  Both sides are complex-linear in ``E``.
    """
    P = a.frame
    E_o = np.linalg.solve(P, np.asarray(E) @ P)
    mu_o = a.mu_frame
    M_o = moment_operator_on(mu_o)
    lhs = np.trace(E_o @ M_o)
    rhs = 0.25 * np.vdot(mu_o, pi_apply(E_o, mu_o))
    if not a.is_complex and not np.iscomplexobj(E):
        return float(np.real(lhs)), float(np.real(rhs))
    return complex(lhs), complex(rhs)


def _affine_min_norm(Ps):
    """Weights of the min-norm point of the affine hull of the columns of ``Ps``."""
    m = Ps.shape[1]
    G = Ps.T @ Ps
    kkt = np.zeros((m + 1, m + 1))
    kkt[:m, :m] = G
    kkt[:m, m] = 1.0
    kkt[m, :m] = 1.0
    rhs = np.zeros(m + 1)
    rhs[m] = 1.0
    sol, *_ = np.linalg.lstsq(kkt, rhs, rcond=None)
    return sol[:m]


def min_norm_point(points, tol=1e-12, max_iter=None):
    """Minimum-norm point of the convex hull of ``points`` (Wolfe's method).

    Returns ``(x, weights)`` where ``weights`` has one entry per input point.
    Ties are broken by lowest point index, so the output is reproducible.
    """
    X = np.asarray(points, dtype=float)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("need a nonempty (m, d) array of points")
    m, d = X.shape
    max_iter = max_iter or 10 * m * max(d, 1)
    scale = max(float(np.max(np.sum(X * X, axis=1))), 1.0)
    eps = tol * scale

    start = int(np.argmin(np.sum(X * X, axis=1)))
    S = [start]
    lam = np.array([1.0])
    x = X[start].copy()
    for _ in range(max_iter):
        dots = X @ x
        j = int(np.argmin(dots))
        if dots[j] >= x @ x - eps or j in S:
            break
        S.append(j)
        lam = np.append(lam, 0.0)
        for _ in range(max_iter):
            alpha = _affine_min_norm(X[S].T)
            if np.all(alpha > 0):
                lam = alpha
                break
            mask = alpha <= 0
            theta = np.min(lam[mask] / (lam[mask] - alpha[mask]))
            lam = (1 - theta) * lam + theta * alpha
            keep = lam > 1e-15
            # drop at least one point: the one that hit zero first
            if np.all(keep):
                idx = np.flatnonzero(mask)[np.argmin(lam[mask])]
                keep[idx] = False
            S = [s for s, k in zip(S, keep) if k]
            lam = lam[keep]
            lam = lam / lam.sum()
        else:
            raise NoConvergence("minor cycle did not terminate")
        x = lam @ X[S]
    else:
        raise NoConvergence(f"no convergence after {max_iter} iterations")
    # polish on the final support
    alpha = _affine_min_norm(X[S].T)
    if np.all(alpha >= 0):
        lam = alpha
        x = lam @ X[S]
    weights = np.zeros(m)
    weights[S] = lam
    return x, weights


def kkt_residual(x, points):
    """Largest violation of ``<x, p> >= ||x||^2`` over the point set."""
    X = np.asarray(points, dtype=float)
    return float(max(0.0, np.max(x @ x - X @ x)))


def active_alphas(mu, tol=DEFAULT_TOL):
    """Triples ``(i, j, k)`` with ``i < j`` and ``mu_ij^k != 0``."""
    n = mu.shape[0]
    ref = np.max(np.abs(mu)) if mu.size else 0.0
    if ref == 0.0:
        return []
    return [
        (i, j, k)
        for i in range(n)
        for j in range(i + 1, n)
        for k in range(n)
        if abs(mu[i, j, k]) > tol.lin * ref
    ]


def alpha_vector(n, i, j, k):
    v = np.zeros(n)
    v[k] += 1.0
    v[i] -= 1.0
    v[j] -= 1.0
    return v


@dataclass
class Check:
    passed: bool
    margin: float
    violation: float
    note: str = ""

    def to_dict(self):
        return {"pass": self.passed, "margin": self.margin, "slack": self.violation, "note": self.note}


@dataclass(eq=False)
class StratumData:
    """Stratum label of a bracket in a fixed orthonormal basis.

    ``mu`` is the bracket in the sorted basis (``beta`` nondecreasing) and
    ``order`` maps sorted positions back to the input basis.
    """

    beta: np.ndarray
    beta_norm_sq: float
    E_beta: np.ndarray
    active: list
    weights: np.ndarray
    mu: np.ndarray
    order: np.ndarray
    checks: dict = field(default_factory=dict)

    @property
    def dim(self):
        return self.beta.shape[0]

    def beta_in_input_basis(self):
        inv = np.argsort(self.order)
        return self.beta[np.ix_(inv, inv)]

    def to_dict(self):
        return {
            "beta": np.real(np.diag(self.beta)).tolist(),
            "beta_norm_sq": self.beta_norm_sq,
            "E_beta": np.real(np.diag(self.E_beta)).tolist(),
            "active_alphas": [[i + 1, j + 1, k + 1] for i, j, k in self.active],
            "order": (self.order + 1).tolist(),
            "checks": {name: c.to_dict() for name, c in self.checks.items()},
        }


def compute_beta(mu, tol=DEFAULT_TOL):
    """``beta = mcc{alpha_ij^k : mu_ij^k != 0}`` for a bracket in an orthonormal basis.

    Accepts a raw bracket array or a metric algebra (its orthonormal frame is used).
    """
    if hasattr(mu, "mu_frame"):
        mu = mu.mu_frame
    mu = np.asarray(mu)
    n = mu.shape[0]
    act = active_alphas(mu, tol)
    if not act:
        raise ZeroBracket("beta is undefined for the zero bracket")
    pts = np.array([alpha_vector(n, *t) for t in act])
    # identical alphas from different triples are merged (first occurrence wins)
    _, first = np.unique(pts, axis=0, return_index=True)
    first = np.sort(first)
    b, w_unique = min_norm_point(pts[first], tol=1e-12)
    weights = np.zeros(len(act))
    weights[first] = w_unique
    order = np.argsort(b, kind="stable")
    b_sorted = b[order]
    mu_sorted = mu[np.ix_(order, order, order)]
    act_sorted = active_alphas(mu_sorted, tol)
    w_sorted = np.zeros(len(act_sorted))
    lookup = {t: wt for t, wt in zip(act, weights)}
    for idx, (i, j, k) in enumerate(act_sorted):
        oi, oj, ok = order[i], order[j], order[k]
        w_sorted[idx] = lookup.get((min(oi, oj), max(oi, oj), ok), 0.0)
    norm_sq = float(b_sorted @ b_sorted)
    return StratumData(
        beta=np.diag(b_sorted),
        beta_norm_sq=norm_sq,
        E_beta=np.diag(b_sorted + norm_sq),
        active=act_sorted,
        weights=w_sorted,
        mu=mu_sorted,
        order=order,
    )


def _check_ge(value, tol, note=""):
    return Check(bool(value >= -tol), float(value), float(max(0.0, -value)), note)


def _check_eq(value, tol, note=""):
    return Check(bool(abs(value) <= tol), float(value), float(abs(value)), note)


def stratum_checks(s, n_random=100, seed=0, tol=DEFAULT_TOL):
    """Evaluate the stratification conditions on ``s`` and store them in ``s.checks``.

    Failures are recorded, not raised.
    """
    mu = s.mu
    n = s.dim
    beta = s.beta
    nb = s.beta_norm_sq
    eps = 1e-10
    mu_sq = bracket_norm_sq(mu)
    der = derivation_basis(mu, tol)
    checks = {}

    # beta + ||beta||^2 I positive definite
    checks["pos_def"] = Check(
        bool(np.min(np.diag(s.E_beta)) > 0), float(np.min(np.real(np.diag(s.E_beta)))), 0.0
    )
    checks["pos_def"].violation = float(max(0.0, -checks["pos_def"].margin))

    # <[beta, D], D> >= 0 with equality iff [beta, D] = 0
    rng = np.random.default_rng(seed)
    samples = list(der)
    if der:
        for _ in range(n_random):
            coef = rng.standard_normal(len(der))
            if np.iscomplexobj(der[0]):
                coef = coef + 1j * rng.standard_normal(len(der))
            samples.append(sum(c * D for c, D in zip(coef, der)))
    worst, iff_ok = np.inf, True
    for D in samples:
        comm = beta @ D - D @ beta
        val = float(np.real(np.trace(comm @ D.conj().T)))
        scale = max(np.linalg.norm(D) ** 2, 1.0)
        worst = min(worst, val / scale)
        if abs(val) <= eps * scale and np.linalg.norm(comm) > np.sqrt(eps) * np.sqrt(scale):
            iff_ok = False
    if not samples:
        worst = 0.0
    c = _check_ge(worst, eps)
    c.passed = c.passed and iff_ok
    c.note = "" if iff_ok else "zero pairing with nonzero commutator"
    checks["cond_brac"] = c

    # ||beta|| <= 4/||mu||^2 ||M_mu||
    M = moment_operator_on(mu)
    rhs = 4.0 / mu_sq * np.linalg.norm(M)
    checks["cond_m"] = _check_ge(rhs - np.sqrt(nb), eps)

    # min <beta, alpha> over active alphas equals ||beta||^2
    b = np.real(np.diag(beta))
    dots = [alpha_vector(n, *t) @ b for t in s.active]
    checks["cond_rest"] = _check_eq(min(dots) - nb, eps)

    # <pi(beta + ||beta||^2 I) mu, mu> >= 0, equality iff it is a derivation
    E = s.E_beta
    piE = pi_apply(E, mu)
    val = float(np.real(np.vdot(mu, piE)))
    c = _check_ge(val, eps * max(mu_sq, 1.0))
    is_der = np.linalg.norm(piE) < tol.lin * max(np.sqrt(mu_sq), 1.0)
    zero = abs(val) <= eps * max(mu_sq, 1.0)
    if zero != is_der:
        c.passed = False
        c.note = "equality does not match derivation test"
    else:
        c.note = "E_beta is a derivation" if is_der else ""
    checks["rest_2"] = c

    # tr(beta D) = 0 for every derivation
    tr_vals = [abs(np.trace(beta @ D)) for D in der]
    checks["rest_1"] = _check_eq(max(tr_vals) if tr_vals else 0.0, eps)

    s.checks = checks
    return s


class LemmaETerms(NamedTuple):
    t1: float
    t2: float
    t3: float
    total: float


def lemma_E_terms(d, s=None, tol=DEFAULT_TOL):
    """Split ``<pi(E_beta)[,], [,]>`` into its nilradical, ``[r,r]`` and action parts.

    ``d`` is a :class:`~kflow.algebra.Decomposition`; ``s`` defaults to the
    stratum of ``d.mu_n`` in the decomposition's nilradical frame.
    """
    mu_n = d.mu_n
    if s is None:
        s = compute_beta(mu_n, tol)
    if "cond_rest" not in s.checks:
        stratum_checks(s, n_random=0, tol=tol)
    if not s.checks["cond_rest"].passed:
        raise PreconditionFailed("cond_rest fails for the supplied beta")
    inv = np.argsort(s.order)
    En = s.E_beta[np.ix_(inv, inv)]
    beta = s.beta[np.ix_(inv, inv)]
    r = d.dim_r
    t1 = float(np.real(np.vdot(mu_n, pi_apply(En, mu_n))))
    lam1 = d.lambda1
    t2 = float(np.real(np.einsum("ijk,kl,ijl->", lam1.conj(), En, lam1))) if r else 0.0
    t3 = 0.0
    for A in d.ad_r_on_n():
        comm = beta @ A - A @ beta
        t3 += 2.0 * float(np.real(np.trace(comm @ A.conj().T)))
    E_full = np.zeros((d.dim, d.dim), dtype=En.dtype)
    E_full[r:, r:] = En
    total = float(np.real(np.vdot(d.mu, pi_apply(E_full, d.mu))))
    return LemmaETerms(t1, t2, t3, total)
