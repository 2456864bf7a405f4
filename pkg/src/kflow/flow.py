"""Fixed-step RK4 integration of the flow ``dg/dt = -K(g)`` on Gram matrices."""

import csv
from dataclasses import dataclass, field

import numpy as np

from .algebra import change_basis, derivation_basis
from .config import DEFAULT_TOL
from .curvature import k_operator_on
from .errors import BlowUp, NonFinite
from .soliton import SEMI, solve_soliton, solve_soliton_operator

NORMALIZATIONS = ("none", "one_plus_t", "unit_norm")
MAX_HALVINGS = 20
MIN_EIG = 1e-12


def _cholesky(G):
    try:
        return np.linalg.cholesky(G)
    except np.linalg.LinAlgError:
        return None


def k_form(mu, G):
    """Gram-matrix velocity ``-K(g)``; returns ``None`` if ``G`` is not positive definite."""
    L = _cholesky(G)
    if L is None:
        return None
    # orthonormal frame P = L^{-H}, so P^{-1} = L^H and the form is L K_o L^H
    mu_o = change_basis(mu, np.linalg.inv(L.conj().T))
    K_o = k_operator_on(mu_o)
    return -(L @ K_o @ L.conj().T)


def _rk4_step(mu, G, h):
    k1 = k_form(mu, G)
    if k1 is None:
        return None
    k2 = k_form(mu, G + 0.5 * h * k1)
    if k2 is None:
        return None
    k3 = k_form(mu, G + 0.5 * h * k2)
    if k3 is None:
        return None
    k4 = k_form(mu, G + h * k3)
    if k4 is None:
        return None
    out = G + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return 0.5 * (out + out.conj().T)


def _advance(mu, G, h, depth=0):
    """One step of size ``h``, split in halves while a stage loses definiteness."""
    out = _rk4_step(mu, G, h)
    if out is not None and np.all(np.isfinite(out)) and np.min(np.linalg.eigvalsh(out)) > MIN_EIG:
        return out
    if out is not None and not np.all(np.isfinite(out)):
        raise NonFinite("non-finite Gram matrix")
    if depth >= MAX_HALVINGS:
        raise BlowUp("metric degenerates: step halving exhausted")
    mid = _advance(mu, G, h / 2, depth + 1)
    return _advance(mu, mid, h / 2, depth + 1)


@dataclass(eq=False)
class FlowTrajectory:
    times: np.ndarray
    grams: np.ndarray
    tr_K: np.ndarray
    eig_K: np.ndarray
    residual: np.ndarray
    mu_norm_sq: np.ndarray
    min_eig_gram: np.ndarray
    normalization: str = "none"
    meta: dict = field(default_factory=dict)

    def write_csv(self, path_or_file):
        n = self.grams.shape[1]
        complex_gram = np.iscomplexobj(self.grams)
        header = ["t"]
        for i in range(n):
            for j in range(n):
                if complex_gram:
                    header += [f"g_{i + 1}_{j + 1}_re", f"g_{i + 1}_{j + 1}_im"]
                else:
                    header.append(f"g_{i + 1}_{j + 1}")
        header += ["tr_K"] + [f"lambda_{k + 1}" for k in range(n)] + ["residual"]
        close = False
        if isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__"):
            fh = open(path_or_file, "w", newline="")
            close = True
        else:
            fh = path_or_file
        try:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for idx, t in enumerate(self.times):
                row = [repr(float(t))]
                for x in self.grams[idx].ravel():
                    row += [repr(float(x.real)), repr(float(x.imag))] if complex_gram else [repr(float(x))]
                row.append(repr(float(self.tr_K[idx])))
                row += [repr(float(v)) for v in self.eig_K[idx]]
                row.append(repr(float(self.residual[idx])))
                w.writerow(row)
        finally:
            if close:
                fh.close()


class _ResidualProbe:
    """Soliton residual at a sample; the derivation algebra depends on the bracket only."""

    def __init__(self, mu, tol):
        self.mu = mu
        self.tol = tol
        self.der = derivation_basis(mu, tol)

    def __call__(self, G):
        L = np.linalg.cholesky(G)
        P = np.linalg.inv(L.conj().T)
        Pinv = L.conj().T
        mu_o = change_basis(self.mu, P)
        K_o = k_operator_on(mu_o)
        der = [Pinv @ D @ P for D in self.der]
        _, _, res, _ = solve_soliton_operator(K_o, der, self.tol)
        return K_o, res, float(np.real(np.vdot(mu_o, mu_o)))


def _normalize(G, t, normalization):
    if normalization == "none":
        return G
    if normalization == "one_plus_t":
        return G / (1.0 + t)
    return G / np.real(np.trace(G))


def integrate(a, t_max, step, normalization="none", sample_every=10, tol=DEFAULT_TOL):
    """Integrate the flow from ``a.gram`` with the bracket held fixed.

    Diagnostics are evaluated on the stored (normalised) samples, taken every
    ``sample_every`` steps plus the initial and final times.
    """
    normalization = normalization.replace("-", "_")
    if normalization not in NORMALIZATIONS:
        raise ValueError(f"normalization must be one of {NORMALIZATIONS}")
    if step <= 0 or t_max < 0:
        raise ValueError("step must be positive and t_max nonnegative")
    mu = a.mu
    probe = _ResidualProbe(mu, tol)
    nsteps = int(round(t_max / step))
    if not np.isclose(nsteps * step, t_max, rtol=1e-12, atol=1e-14):
        nsteps = int(np.ceil(t_max / step))
    h = t_max / nsteps if nsteps else 0.0

    times, grams, trK, eigK, res, musq, mineig = [], [], [], [], [], [], []

    def record(t, G):
        Gs = _normalize(G, t, normalization)
        K_o, r, m2 = probe(Gs)
        times.append(t)
        grams.append(Gs.copy())
        trK.append(float(np.real(np.trace(K_o))))
        eigK.append(np.linalg.eigvalsh(0.5 * (K_o + K_o.conj().T)))
        res.append(r)
        musq.append(m2)
        mineig.append(float(np.min(np.linalg.eigvalsh(Gs))))

    G = np.array(a.gram)
    record(0.0, G)
    for k in range(1, nsteps + 1):
        G = _advance(mu, G, h)
        if k % sample_every == 0 or k == nsteps:
            record(k * h, G)
    return FlowTrajectory(
        times=np.array(times),
        grams=np.array(grams),
        tr_K=np.array(trK),
        eig_K=np.array(eigK),
        residual=np.array(res),
        mu_norm_sq=np.array(musq),
        min_eig_gram=np.array(mineig),
        normalization=normalization,
        meta={"step": h, "t_max": t_max, "sample_every": sample_every, "label": a.label},
    )


def soliton_residual(a, tol=DEFAULT_TOL):
    return solve_soliton(a, SEMI, tol).residual
