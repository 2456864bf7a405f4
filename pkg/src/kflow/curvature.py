"""Curvature-type tensors of left-invariant metrics.

Every tensor is computed in a Cholesky orthonormal frame and transported
back.  Forms are stored as matrices ``F`` with ``b(x, y) = y^H F x``; the
corresponding operator is ``G^{-1} F``.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _linalg
from .algebra import (
    bracket_norm_sq,
    killing_form,
    one_one_part,
    real_form_to_hermitian,
    realify,
)
from .config import DEFAULT_TOL
from .errors import PathMismatch


def moment_operator_on(mu):
    """``M`` as an operator for an orthonormal frame in which the bracket is ``mu``."""
    if mu.shape[0] == 0:
        return np.zeros((0, 0), dtype=mu.dtype)
    # -1/2 sum_k ad_k^H ad_k + 1/4 sum_k ad_k ad_k^H
    first = np.einsum("kai,kbi->ab", mu.conj(), mu)
    second = np.einsum("kja,kjb->ab", mu, mu.conj())
    return -0.5 * first + 0.25 * second


def traces_on(mu):
    """``tr ad(e_i)`` for each basis vector."""
    return np.einsum("ijj->i", mu)


def k_operator_on(mu):
    """``K = M - S(ad_H) + Q`` as an operator in an orthonormal frame."""
    M = moment_operator_on(mu)
    t = traces_on(mu)
    H = t.conj()
    adH = np.einsum("i,ijk->kj", H, mu)
    S = 0.5 * (adH + adH.conj().T)
    Q = 0.5 * np.outer(t.conj(), t)
    return M - S + Q


def moment_tensor(a):
    """``(form, operator)`` of ``M``; complex algebras use Hermitian sums."""
    P = a.frame
    M_o = moment_operator_on(a.mu_frame)
    op = P @ M_o @ np.linalg.inv(P)
    return a.gram @ op, op


def mean_curvature(a):
    """``H`` with ``h(X, H) = tr ad_X``."""
    t = traces_on(a.mu)
    return np.linalg.solve(a.gram, t.conj())


def k_operator(a):
    P = a.frame
    return P @ k_operator_on(a.mu_frame) @ np.linalg.inv(P)


@dataclass(frozen=True, eq=False)
class CurvatureReport:
    M: np.ndarray
    ric: np.ndarray
    B: np.ndarray
    Q_hat: np.ndarray
    S_adH: np.ndarray
    K: np.ndarray
    M_op: np.ndarray
    K_op: np.ndarray
    H: np.ndarray
    tr_M: float
    mu_norm_sq: float
    unimodular: bool
    ric_11: Optional[np.ndarray] = None
    path_gap: float = 0.0

    def to_dict(self):
        from .io import encode

        return {
            "M": encode(self.M),
            "ric": encode(self.ric),
            "ric_11": None if self.ric_11 is None else encode(self.ric_11),
            "B": encode(self.B),
            "Q_hat": encode(self.Q_hat),
            "S_adH": encode(self.S_adH),
            "K": encode(self.K),
            "M_op": encode(self.M_op),
            "K_op": encode(self.K_op),
            "H": encode(self.H),
            "tr_M_op": self.tr_M,
            "mu_norm_sq": self.mu_norm_sq,
            "unimodular": self.unimodular,
            "path_gap": self.path_gap,
        }


def _real_tensors(a, tol):
    """Forms ``(M, B, S, Q, H)`` for a real metric Lie algebra."""
    G = a.gram
    M, _ = moment_tensor(a)
    B, _ = killing_form(a)
    H = mean_curvature(a)
    unimodular = np.linalg.norm(H) < tol.lin * max(1.0, np.linalg.norm(a.mu))
    if unimodular:
        S = np.zeros_like(G)
        Q = np.zeros_like(G)
    else:
        adH = np.einsum("i,ijk->kj", H, a.mu)
        S = _linalg.sym(adH, G)
        S = G @ S
        t = np.einsum("ijj->i", a.mu)
        Q = 0.5 * np.outer(t.conj(), t)
    return M, B, S, Q, H, bool(unimodular)


def curvature_report(a, tol=DEFAULT_TOL):
    if not a.is_complex:
        M, B, S, Q, H, uni = _real_tensors(a, tol)
        K = M - S + Q
        ric = M - 0.5 * B - S
        return CurvatureReport(
            M=M, ric=ric, B=B, Q_hat=Q, S_adH=S, K=K,
            M_op=np.linalg.solve(a.gram, M), K_op=np.linalg.solve(a.gram, K), H=H,
            tr_M=float(np.real(np.trace(np.linalg.solve(a.gram, M)))),
            mu_norm_sq=bracket_norm_sq(a.mu_frame), unimodular=uni,
        )
    # Hermitian route: complex traces over a unitary frame.
    M, B_c, S, Q, H, uni = _real_tensors(a, tol)
    K = M - S + Q
    # Realified route: Ric^{1,1} of the underlying real algebra plus Q^{1,1}.
    ra, J = realify(a)
    Mr, Br, Sr, Qr, _, _ = _real_tensors(ra, tol)
    ric_r = Mr - 0.5 * Br - Sr
    K_real = real_form_to_hermitian(one_one_part(ric_r, J) + one_one_part(Qr, J))
    gap = float(np.linalg.norm(K_real - K))
    if gap > 10 * tol.lin * max(1.0, np.linalg.norm(K)):
        raise PathMismatch(f"realified and Hermitian K differ by {gap:.3e}")
    return CurvatureReport(
        M=M, ric=ric_r, B=B_c, Q_hat=Q, S_adH=S, K=K,
        M_op=np.linalg.solve(a.gram, M), K_op=np.linalg.solve(a.gram, K), H=H,
        tr_M=float(np.real(np.trace(np.linalg.solve(a.gram, M)))),
        mu_norm_sq=bracket_norm_sq(a.mu_frame), unimodular=uni,
        ric_11=real_form_to_hermitian(one_one_part(ric_r, J)), path_gap=gap,
    )
