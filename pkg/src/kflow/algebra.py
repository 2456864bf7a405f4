"""Metric Lie algebras given by structure constants.

Conventions used throughout the package:

* ``mu[i, j, k]`` is the coefficient of ``e_k`` in ``[e_i, e_j]``.
* ``ad(X)[k, j]`` is the ``e_k`` component of ``[X, e_j]``.
* The metric is ``h(x, y) = y^H G x`` (linear in the first slot), so the
  adjoint of an endomorphism is ``G^{-1} A^H G``.
* The norm on brackets sums over *all* ordered basis pairs, so
  ``||mu||^2`` counts each unordered bracket twice.
"""

from dataclasses import dataclass, field as dc_field
from functools import cached_property
from typing import Optional

import numpy as np

from . import _linalg
from .config import DEFAULT_TOL, Tolerances
from .errors import (
    DegenerateFlag,
    DimensionMismatch,
    JacobiViolation,
    NotASubalgebra,
    NotPositiveDefinite,
    NumericallyAmbiguous,
)


def bracket(mu, x, y):
    return np.einsum("i,j,ijk->k", x, y, mu)


def ad_matrices(mu):
    """Stack of ``ad(e_i)`` matrices, shape ``(n, n, n)``."""
    return np.transpose(mu, (0, 2, 1))


def jacobi_residual(mu):
    """Max-norm of the cyclic sum ``[x,[y,z]] + [y,[z,x]] + [z,[x,y]]`` on basis triples."""
    if mu.shape[0] == 0:
        return 0.0
    # [e_a, [e_b, e_c]] = sum_k mu[b,c,k] mu[a,k,m]
    t = np.einsum("bck,akm->abcm", mu, mu)
    cyc = t + np.transpose(t, (1, 2, 0, 3)) + np.transpose(t, (2, 0, 1, 3))
    return float(np.max(np.abs(cyc)))


def antisymmetry_residual(mu):
    if mu.size == 0:
        return 0.0
    return float(np.max(np.abs(mu + np.transpose(mu, (1, 0, 2)))))


def bracket_norm_sq(mu):
    """``||mu||^2`` in an orthonormal frame (all ordered pairs)."""
    return float(np.real(np.vdot(mu, mu)))


@dataclass(frozen=True, eq=False)
class MetricLieAlgebra:
    """Structure constants plus a positive definite (Hermitian) Gram matrix."""

    mu: np.ndarray
    gram: np.ndarray
    field: str = "real"
    label: str = ""
    nilradical_override: Optional[np.ndarray] = None
    tol: Tolerances = dc_field(default=DEFAULT_TOL, repr=False)
    check: bool = dc_field(default=True, repr=False)

    def __post_init__(self):
        if self.field not in ("real", "complex"):
            raise ValueError(f"field must be 'real' or 'complex', got {self.field!r}")
        dtype = float if self.field == "real" else complex
        mu = np.asarray(self.mu)
        gram = np.asarray(self.gram)
        if self.field == "real" and (np.iscomplexobj(mu) or np.iscomplexobj(gram)):
            if np.any(np.imag(mu)) or np.any(np.imag(gram)):
                raise ValueError("real algebra with complex data")
            mu, gram = np.real(mu), np.real(gram)
        mu = np.array(mu, dtype=dtype)
        gram = np.array(gram, dtype=dtype)
        n = gram.shape[0]
        if mu.shape != (n, n, n) or gram.shape != (n, n):
            raise DimensionMismatch(f"mu shape {mu.shape} incompatible with gram {gram.shape}")
        mu.flags.writeable = False
        gram.flags.writeable = False
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "gram", gram)
        if self.nilradical_override is not None:
            ov = np.array(self.nilradical_override, dtype=dtype).reshape(n, -1)
            object.__setattr__(self, "nilradical_override", ov)
        if self.check:
            self.validate()

    def validate(self):
        tol = self.tol
        if antisymmetry_residual(self.mu) > 0.0:
            raise ValueError("structure constants are not antisymmetric")
        if not np.array_equal(self.gram, self.gram.conj().T):
            raise NotPositiveDefinite("gram is not exactly symmetric/Hermitian")
        if self.dim and np.min(np.linalg.eigvalsh(self.gram)) <= tol.pd:
            raise NotPositiveDefinite("gram has eigenvalue below tolerance")
        res = jacobi_residual(self.mu)
        if res >= tol.jacobi:
            raise JacobiViolation(f"Jacobi residual {res:.3e}")

    @property
    def dim(self):
        return self.gram.shape[0]

    @property
    def is_complex(self):
        return self.field == "complex"

    def with_gram(self, gram, label=None, check=True):
        return MetricLieAlgebra(
            self.mu, gram, self.field, self.label if label is None else label,
            self.nilradical_override, self.tol, check,
        )

    @cached_property
    def frame(self):
        """Upper-triangular ``P`` whose columns form a ``gram``-orthonormal basis."""
        return _linalg.orthonormal_frame(self.gram)

    @cached_property
    def mu_frame(self):
        """Structure constants in the orthonormal frame ``self.frame``."""
        return change_basis(self.mu, self.frame)

    def to_frame(self, A):
        P = self.frame
        return np.linalg.solve(P, A @ P)

    def from_frame(self, A):
        P = self.frame
        return P @ A @ np.linalg.inv(P)

    def adjoint(self, A):
        return _linalg.adjoint(A, self.gram)


def change_basis(mu, P):
    """Structure constants in the basis ``f_a = sum_i P[i, a] e_i``."""
    Pinv = np.linalg.inv(P)
    return np.einsum("ia,jb,ijk,ck->abc", P, P, mu, Pinv)


def ad_operator(a, X):
    X = np.asarray(X)
    if X.shape != (a.dim,):
        raise DimensionMismatch(f"vector of length {X.shape} for dimension {a.dim}")
    return np.einsum("i,ijk->kj", X, a.mu)


def killing_form(a):
    """Killing form ``B[i, j] = tr(ad e_i ad e_j)`` and ``G^{-1} B``.

    The raised operator is only meaningful as a self-adjoint endomorphism
    for real algebras; for complex ones ``B`` is bilinear, not Hermitian.
    """
    ad = ad_matrices(a.mu)
    B = np.einsum("iab,jba->ij", ad, ad)
    return B, np.linalg.solve(a.gram, B)


def _mu_of(target):
    return target.mu if isinstance(target, MetricLieAlgebra) else np.asarray(target)


def derivation_operator(mu):
    """Matrix of the linear map ``D -> pi(D) mu`` (``D`` flattened row-major)."""
    n = mu.shape[0]
    eye = np.eye(n)
    # pi(E)mu[i,j,k] = E[k,l] mu[i,j,l] - E[l,i] mu[l,j,k] - E[l,j] mu[i,l,k]
    t1 = np.einsum("kp,ijq->ijkpq", eye, mu)
    t2 = np.einsum("pjk,iq->ijkpq", mu, eye)
    t3 = np.einsum("ipk,jq->ijkpq", mu, eye)
    return (t1 - t2 - t3).reshape(n**3, n * n)


def derivation_basis(target, tol=DEFAULT_TOL):
    """Orthonormal basis (Frobenius) of the derivation algebra of ``target``.

    ``target`` is a :class:`MetricLieAlgebra` or a raw bracket array, e.g. the
    restriction of a bracket to the nilradical.  Over a complex algebra the
    basis spans ``Der`` as a complex vector space.
    """
    mu = _mu_of(target)
    n = mu.shape[0]
    if n == 0:
        return []
    N = _linalg.null_space(derivation_operator(mu), tol.lin)
    return [N[:, k].reshape(n, n) for k in range(N.shape[1])]


def is_derivation(D, mu, tol=DEFAULT_TOL):
    from .stratify import pi_apply

    ref = max(np.linalg.norm(mu), 1.0)
    return np.linalg.norm(pi_apply(D, mu)) < tol.lin * ref


def _is_nilpotent(A, tol):
    n = A.shape[0]
    norm = np.linalg.norm(A, 2)
    if norm == 0.0:
        return True
    return np.linalg.norm(np.linalg.matrix_power(A / norm, n)) < tol.nil


def _associative_envelope(gens, tol):
    """Orthonormal (flattened) basis of the associative algebra generated by ``gens``."""
    n = gens[0].shape[0]
    span = _linalg.column_space(np.stack([g.ravel() for g in gens], axis=1), tol.lin, strict=True)
    while True:
        mats = [span[:, k].reshape(n, n) for k in range(span.shape[1])]
        prods = [m @ g for m in mats for g in gens]
        cand = np.concatenate([span, np.stack([p.ravel() for p in prods], axis=1)], axis=1)
        new = _linalg.column_space(cand, tol.lin, strict=True)
        if new.shape[1] == span.shape[1]:
            return mats
        span = new


def derived_algebra(mu, tol=DEFAULT_TOL):
    n = mu.shape[0]
    cols = mu.reshape(n * n, n).T
    return _linalg.column_space(cols, tol.lin, strict=True)


def radical(a, tol=DEFAULT_TOL):
    """Killing-orthogonal complement of ``[g, g]`` (Cartan's criterion)."""
    n = a.dim
    DG = derived_algebra(a.mu, tol)
    if DG.shape[1] == 0:
        return np.eye(n, dtype=a.mu.dtype)
    B, _ = killing_form(a)
    return _linalg.null_space(DG.T @ B, tol.lin, strict=True)


def nilradical(a, tol=DEFAULT_TOL):
    """Basis (columns) of the largest nilpotent ideal.

    Elements of the radical whose ``ad`` is nilpotent are exactly those whose
    ``ad`` lies in the Jacobson radical of the associative envelope ``A`` of
    ``ad(rad)``; in characteristic zero that radical is the kernel of the
    trace form ``tr(x y)`` on ``A``, which makes the condition linear.
    """
    if a.nilradical_override is not None:
        N = _linalg.column_space(a.nilradical_override, tol.lin)
        _validate_nilradical(a, N, tol)
        return _coordinate_aligned(N, tol)
    R = radical(a, tol)
    if R.shape[1] == 0:
        return R
    ads = [ad_operator(a, R[:, k]) for k in range(R.shape[1])]
    if all(np.linalg.norm(x) == 0.0 for x in ads):
        return _coordinate_aligned(R, tol)
    nonzero = [x for x in ads if np.linalg.norm(x) > 0.0]
    env = _associative_envelope(nonzero, tol)
    T = np.array([[np.trace(x @ b) for x in ads] for b in env])
    coeffs = _linalg.null_space(T, tol.lin, strict=True)
    N = _linalg.column_space(R @ coeffs, tol.lin)
    _validate_nilradical(a, N, tol)
    return _coordinate_aligned(N, tol)


def _validate_nilradical(a, N, tol):
    n = a.dim
    if N.shape[1] == 0:
        return
    proj_out = np.eye(n) - N @ np.linalg.pinv(N)
    scale = max(np.linalg.norm(a.mu), 1.0)
    for k in range(n):
        for j in range(N.shape[1]):
            v = bracket(a.mu, np.eye(n)[k], N[:, j])
            if np.linalg.norm(proj_out @ v) > tol.lin * scale * 10:
                raise NumericallyAmbiguous("nilradical candidate is not an ideal")
    for j in range(N.shape[1]):
        if not _is_nilpotent(ad_operator(a, N[:, j]), tol):
            raise NumericallyAmbiguous("nilradical candidate has a non-nilpotent element")


def _coordinate_aligned(basis, tol):
    """Prefer coordinate vectors when a subspace is spanned by some of them."""
    n, m = basis.shape
    if m == 0:
        return basis
    proj = basis @ np.linalg.pinv(basis)
    picked = [k for k in range(n) if np.linalg.norm(proj[:, k] - np.eye(n)[:, k]) < tol.lin * 10]
    if len(picked) == m:
        return np.eye(n, dtype=basis.dtype)[:, picked]
    return basis


@dataclass(frozen=True, eq=False)
class Decomposition:
    """Orthogonal splitting ``g = r + n`` in an adapted orthonormal frame.

    ``frame`` holds ``[r_basis | n_basis]`` as columns; ``mu`` is the bracket
    expressed in that frame, so indices ``< dim_r`` belong to ``r``.
    """

    frame: np.ndarray
    dim_r: int
    mu: np.ndarray

    @property
    def dim(self):
        return self.frame.shape[0]

    @property
    def dim_n(self):
        return self.dim - self.dim_r

    @property
    def r_basis(self):
        return self.frame[:, : self.dim_r]

    @property
    def n_basis(self):
        return self.frame[:, self.dim_r :]

    @property
    def lambda0(self):
        r = self.dim_r
        return self.mu[:r, :r, :r]

    @property
    def lambda1(self):
        r = self.dim_r
        return self.mu[:r, :r, r:]

    @property
    def sigma(self):
        r = self.dim_r
        return self.mu[:r, r:, :]

    @property
    def mu_n(self):
        r = self.dim_r
        return self.mu[r:, r:, r:]

    def ad_r_on_n(self):
        """``ad(r_i)|_n`` for the orthonormal basis of ``r``."""
        r = self.dim_r
        return [self.mu[i, r:, r:].T for i in range(r)]


def orthogonal_decomposition(a, tol=DEFAULT_TOL):
    n = a.dim
    N = nilradical(a, tol)
    dtype = np.result_type(a.mu, float)
    if N.shape[1]:
        n_basis = _linalg.gram_schmidt(N, a.gram, reverse=True)
        # r = n^perp: orthogonal complement of the remaining coordinate vectors
        Gn = n_basis.conj().T @ a.gram
    else:
        n_basis = np.zeros((n, 0), dtype=dtype)
        Gn = np.zeros((0, n), dtype=dtype)
    # vectors x with h(x, n_j) = n_j^H G x = 0
    R = _coordinate_aligned(_linalg.null_space(Gn, tol.lin) if N.shape[1] else np.eye(n, dtype=dtype), tol)
    if R.shape[1]:
        r_basis = _linalg.gram_schmidt(R, a.gram, reverse=True)
    else:
        r_basis = np.zeros((n, 0), dtype=dtype)
    frame = np.concatenate([r_basis, n_basis], axis=1).astype(dtype)
    return Decomposition(frame=frame, dim_r=r_basis.shape[1], mu=change_basis(a.mu, frame))


def reductive_split(d, tol=DEFAULT_TOL):
    """Split ``r = h + a`` with ``h = [r, r]`` and ``a`` the centre of ``r``.

    Returns bases in ``r``-frame coordinates and whether ``r`` is reductive
    (``h + a = r`` directly and ``h`` semisimple).
    """
    scale = max(np.linalg.norm(d.mu), 1.0)
    if np.linalg.norm(d.lambda1) >= tol.lin * scale:
        raise NotASubalgebra(f"||lambda_1|| = {np.linalg.norm(d.lambda1):.3e}")
    lam = d.lambda0
    m = d.dim_r
    if m == 0:
        empty = np.zeros((0, 0))
        return empty, empty, True
    h = derived_algebra(lam, tol)
    center = _linalg.null_space(lam.transpose(0, 2, 1).reshape(m, m * m).T, tol.lin)
    both = np.concatenate([h, center], axis=1)
    direct = both.shape[1] == m and np.linalg.matrix_rank(both, tol=tol.lin * 10) == m
    semisimple = True
    if h.shape[1]:
        mu_h = _restrict(lam, h)
        ad = ad_matrices(mu_h)
        B = np.einsum("iab,jba->ij", ad, ad)
        s = np.linalg.svd(B, compute_uv=False)
        semisimple = s[-1] > tol.lin * max(s[0], 1.0)
    return h, center, bool(direct and semisimple)


def _restrict(mu, S):
    """Bracket of the subalgebra with orthonormal basis columns ``S``."""
    return np.einsum("ia,jb,ijk,kc->abc", S, S, mu, S.conj())


def adapted_unitary_basis(a, flag=None, tol=DEFAULT_TOL):
    """Orthonormalise a flag from the deepest subspace outward.

    ``flag`` has columns ``v_1..v_n`` with ``V_k = span(v_k, ..., v_n)``;
    defaults to the coordinate basis.  Returns ``(P, algebra in the new basis)``
    where the new algebra has identity Gram matrix.
    """
    n = a.dim
    V = np.eye(n, dtype=a.mu.dtype) if flag is None else np.asarray(flag)
    if V.shape != (n, n):
        raise DimensionMismatch(f"flag shape {V.shape}, expected {(n, n)}")
    P = _linalg.gram_schmidt(V, a.gram, reverse=True, tol=tol.lin)
    if P is None:
        raise DegenerateFlag("flag step collapses dimension")
    mu = change_basis(a.mu, P)
    out = MetricLieAlgebra(mu, np.eye(n), a.field, a.label, None, a.tol, check=False)
    return P, out


def realify(a, scale=2.0):
    """Underlying real algebra on ``(X_1..X_n, JX_1..JX_n)`` and the operator ``J``.

    The real inner product is ``scale * Re h``.  With ``scale=2`` the real
    curvature operators coincide with the Hermitian ones computed from complex
    traces over a unitary basis.
    """
    if not a.is_complex:
        raise ValueError("realify expects a complex algebra")
    n = a.dim
    re, im = np.real(a.mu), np.imag(a.mu)
    mu = np.zeros((2 * n, 2 * n, 2 * n))
    # [X_i, X_j] = sum (re + i im) X_k
    mu[:n, :n, :n], mu[:n, :n, n:] = re, im
    # [JX_i, X_j] = [X_i, JX_j] = i [X_i, X_j]
    for blk in (np.s_[n:, :n], np.s_[:n, n:]):
        mu[blk + (np.s_[:n],)] = -im
        mu[blk + (np.s_[n:],)] = re
    # [JX_i, JX_j] = -[X_i, X_j]
    mu[n:, n:, :n], mu[n:, n:, n:] = -re, -im
    Gr, Gi = np.real(a.gram), np.imag(a.gram)
    gram = scale * np.block([[Gr, -Gi], [Gi, Gr]])
    gram = 0.5 * (gram + gram.T)
    J = np.block([[np.zeros((n, n)), -np.eye(n)], [np.eye(n), np.zeros((n, n))]])
    out = MetricLieAlgebra(mu, gram, "real", a.label + " (realified)", None, a.tol, check=False)
    return out, J


def one_one_part(form, J):
    """``b11(X, Y) = (b(X, Y) + b(JX, JY)) / 2`` for a real form ``b(x, y) = x^T b y``."""
    if form.shape != J.shape:
        raise DimensionMismatch(f"form {form.shape} vs J {J.shape}")
    return 0.5 * (form + J.T @ form @ J)


def real_form_to_hermitian(form, scale=2.0):
    """Inverse of realification for a J-invariant symmetric form."""
    n = form.shape[0] // 2
    return (form[:n, :n] + 1j * form[n:, :n]) / scale


def to_real_vector(x):
    return np.concatenate([np.real(x), np.imag(x)])
