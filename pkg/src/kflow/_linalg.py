"""Small dense linear-algebra helpers shared across modules."""

import numpy as np

from .errors import NotPositiveDefinite, NumericallyAmbiguous, SingularMatrix


def _rank_split(s, tol, strict):
    if s.size == 0 or s[0] == 0.0:
        return 0
    rel = s / s[0]
    if strict and np.any((rel >= tol) & (rel < 10 * tol)):
        raise NumericallyAmbiguous(
            f"singular value ratio {rel[(rel >= tol) & (rel < 10 * tol)][0]:.3e} "
            f"in gray zone [{tol:.1e}, {10 * tol:.1e}]"
        )
    return int(np.count_nonzero(rel >= tol))


def null_space(A, tol=1e-9, strict=False):
    """Orthonormal columns spanning the (numerical) kernel of ``A``."""
    A = np.atleast_2d(A)
    ncols = A.shape[1]
    if A.shape[0] == 0:
        return np.eye(ncols, dtype=A.dtype)
    _, s, vh = np.linalg.svd(A)
    rank = _rank_split(s, tol, strict)
    return vh[rank:].conj().T


def column_space(A, tol=1e-9, strict=False):
    """Orthonormal columns spanning the range of ``A``."""
    A = np.atleast_2d(A)
    if A.shape[1] == 0:
        return np.zeros((A.shape[0], 0), dtype=A.dtype)
    u, s, _ = np.linalg.svd(A, full_matrices=False)
    rank = _rank_split(s, tol, strict)
    return u[:, :rank]


def orthonormal_frame(gram):
    """Return ``P`` with ``P^H G P = I`` (upper triangular, from Cholesky).

    Inner products are ``h(x, y) = y^H G x``.
    """
    try:
        L = np.linalg.cholesky(gram)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite("gram is not positive definite") from exc
    # P = L^{-H}
    return np.linalg.inv(L.conj().T)


def adjoint(A, gram=None):
    """Adjoint of ``A`` with respect to ``h(x, y) = y^H G x``."""
    if gram is None:
        return A.conj().T
    return np.linalg.solve(gram, A.conj().T @ gram)


def sym(A, gram=None):
    return 0.5 * (A + adjoint(A, gram))


def check_invertible(A, max_cond=1e12):
    cond = np.linalg.cond(A)
    if not np.isfinite(cond) or cond > max_cond:
        raise SingularMatrix(f"condition number {cond:.3e} exceeds {max_cond:.1e}")


def gram_schmidt(vectors, gram, reverse=False, tol=1e-12):
    """Orthonormalise the columns of ``vectors`` in the inner product ``gram``.

    With ``reverse=True`` the last column is normalised first, so that
    ``span(w_k, ..., w_m) = span(v_k, ..., v_m)`` for every ``k``.
    Returns ``None`` if a column collapses.
    """
    m = vectors.shape[1]
    order = range(m - 1, -1, -1) if reverse else range(m)
    out = np.zeros_like(vectors, dtype=np.result_type(vectors, gram, float))
    done = []
    for k in order:
        v = vectors[:, k].astype(out.dtype)
        for j in done:
            w = out[:, j]
            v = v - (w.conj() @ gram @ v) * w
        norm_sq = np.real(v.conj() @ gram @ v)
        ref = np.real(vectors[:, k].conj() @ gram @ vectors[:, k])
        if norm_sq <= tol * max(ref, 1e-300):
            return None
        out[:, k] = v / np.sqrt(norm_sq)
        done.append(k)
    return out
