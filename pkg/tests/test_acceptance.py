"""Acceptance criteria, one test each.  Every test records a pass/fail line."""

import time

import numpy as np
from scipy.linalg import expm

from kflow.algebra import MetricLieAlgebra, change_basis, derivation_basis
from kflow.catalog import CATALOG, get_entry
from kflow.curvature import curvature_report, moment_tensor
from kflow.errors import KFlowError
from kflow.flow import integrate
from kflow.soliton import solve_soliton, solve_soliton_operator, verify_structure
from kflow.stratify import compute_beta, moment_pairing, pi_apply, stratum_checks

import conftest
from conftest import random_algebra


def record(n, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {n}: {detail}"
    conftest.ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def sym(A):
    return 0.5 * (A + A.conj().T)


def certificate_gap(cert, c, D):
    return abs(cert.c - c), float(np.max(np.abs(sym(cert.D) - np.asarray(D))))


def test_criterion_01_s31():
    start = time.perf_counter()
    a = get_entry("s31C").build({"p": 1, "q": 0, "r": 0, "s": 0})
    cert = solve_soliton(a)
    elapsed = time.perf_counter() - start
    dc, dD = certificate_gap(cert, -1.0, np.diag([0, 1, 1, 1]))
    ok = cert.certified and cert.residual < 1e-8 and dc < 1e-8 and dD < 1e-8 and elapsed < 1.0
    record(1, ok, f"s31C c={cert.c:.12g} |dc|={dc:.1e} |dD|={dD:.1e} residual={cert.residual:.1e} time={elapsed:.3f}s")


def test_criterion_02_g1():
    cert = solve_soliton(get_entry("g_1(-2)").build({"p": 1, "s": 1, "u": -2}))
    dc, dD = certificate_gap(cert, -3.0, np.diag([0, 3, 3, 3]))
    ok = cert.residual < 1e-8 and dc < 1e-8 and dD < 1e-8
    record(2, ok, f"g_1(-2) c={cert.c:.12g} |dc|={dc:.1e} |dD|={dD:.1e} residual={cert.residual:.1e}")


def test_criterion_03_g4():
    cert = solve_soliton(get_entry("g_4").build({"p": 1, "q": 1, "r": 1}))
    dc, dD = certificate_gap(cert, -1.5, 1.5 * np.diag([0, 1, 1, 1]))
    off = solve_soliton(get_entry("g_4").build({"p": 1, "q": 2, "r": 1}))
    ok = cert.residual < 1e-8 and dc < 1e-8 and dD < 1e-8 and off.status == "rejected" and off.residual > 1e-3
    record(
        3,
        ok,
        f"g_4 c={cert.c:.12g} |dc|={dc:.1e} |dD|={dD:.1e} residual={cert.residual:.1e}; "
        f"p!=q residual={off.residual:.3g} ({off.status})",
    )


def test_criterion_04_g7_standard_metric():
    a = get_entry("g_7").build({"z1": 1, "zn": 1})
    cert = solve_soliton(a)
    K_gap = float(np.max(np.abs(cert.K_op - np.diag([-1, 0, 0, 0]))))
    dc, dD = certificate_gap(cert, -1.0, np.diag([0, 1, 1, 1]))
    try:
        rep = verify_structure(a, cert, eps=1e-8)
        structure = f"structure pass={rep.passed} max slack={rep.max_slack:.1e}"
        structure_ok = rep.passed and rep.max_slack < 1e-8 and "cor_gram_formula" in rep.checks
    except KFlowError as exc:
        structure = f"structure not evaluated ({type(exc).__name__})"
        structure_ok = False
    ok = K_gap < 1e-8 and dc < 1e-8 and dD < 1e-8 and cert.residual < 1e-8 and structure_ok
    record(
        4,
        ok,
        f"g_7 standard metric K_op diag={np.round(np.diag(cert.K_op).real, 12).tolist()} |dK|={K_gap:.3g} "
        f"c={cert.c:.6g} residual={cert.residual:.3g}; {structure}",
    )


def test_criterion_05_negative_control():
    cert = solve_soliton(get_entry("s31C").build({"q": 0.3}))
    ok = cert.status == "rejected" and cert.residual > 1e-2
    record(5, ok, f"s31C with g(Z2, Z3)=0.3 residual={cert.residual:.4g} ({cert.status})")


def test_criterion_06_moment_identity():
    rng = np.random.default_rng(6)
    worst = 0.0
    start = time.perf_counter()
    for trial in range(1000):
        n = int(rng.integers(2, 7))
        cplx = bool(trial % 2)
        mu = rng.standard_normal((n, n, n))
        E = rng.standard_normal((n, n))
        if cplx:
            mu = mu + 1j * rng.standard_normal((n, n, n))
            E = E + 1j * rng.standard_normal((n, n))
        mu = mu - np.transpose(mu, (1, 0, 2))
        a = MetricLieAlgebra(mu, np.eye(n), "complex" if cplx else "real", check=False)
        lhs, rhs = moment_pairing(a, E)
        worst = max(worst, abs(lhs - rhs) / (1 + abs(lhs)))
    elapsed = time.perf_counter() - start
    ok = worst < 1e-10 and elapsed < 5.0
    record(6, ok, f"1000 random (mu, E) worst relative gap={worst:.1e} time={elapsed:.2f}s")


def _norm_sq_oracle(a):
    # ||mu||^2 over an eigenvector orthonormal basis, all ordered pairs
    w, U = np.linalg.eigh(a.gram)
    return float(np.sum(np.abs(change_basis(a.mu, U / np.sqrt(w))) ** 2))


def test_criterion_07_trace_identity():
    rng = np.random.default_rng(7)
    algebras = [e.build() for e in CATALOG.values()]
    algebras += [random_algebra(rng, bool(k % 2)) for k in range(1000)]
    worst = 0.0
    for a in algebras:
        _, op = moment_tensor(a)
        worst = max(worst, abs(np.trace(op).real + 0.25 * _norm_sq_oracle(a)))
    _, op = moment_tensor(get_entry("heisenberg_real").build())
    heis = float(np.trace(op).real)
    ok = worst < 1e-10 and heis == -0.5
    record(7, ok, f"{len(algebras)} algebras worst |tr M + ||mu||^2/4|={worst:.1e}; Heisenberg tr M={heis!r}")


def test_criterion_08_nilsoliton():
    a = get_entry("heisenberg_real").build()
    cert = solve_soliton(a)
    dc, dD = certificate_gap(cert, -1.5, np.diag([1, 1, 2]))
    s = compute_beta(a)
    mu_sq = float(np.sum(np.abs(a.mu_frame) ** 2))
    cross_c = abs(cert.c + 0.25 * s.beta_norm_sq * mu_sq)
    rep = verify_structure(a, cert)
    cross_t = abs(rep.t + cert.c / s.beta_norm_sq)
    ok = dc < 1e-10 and dD < 1e-10 and cross_c < 1e-10 and cross_t < 1e-10 and abs(rep.t - 0.5) < 1e-10
    record(8, ok, f"h3 c={cert.c:.12g} ||beta||^2={s.beta_norm_sq:.12g} ||mu||^2={mu_sq:g} t={rep.t:.12g} gaps {cross_c:.1e}, {cross_t:.1e}")


def test_criterion_09_stratification():
    h = stratum_checks(compute_beta(get_entry("heisenberg_real").build()))
    f_alg = get_entry("filiform_n4").build()
    f = stratum_checks(compute_beta(f_alg))
    gaps = [
        np.max(np.abs(np.diag(h.beta) - [-1, -1, 1])),
        np.max(np.abs(np.diag(h.E_beta) - [2, 2, 4])),
        np.linalg.norm(pi_apply(h.E_beta, h.mu)),
        np.max(np.abs(np.diag(f.beta) - [-1, -0.5, 0, 0.5])),
        np.linalg.norm(pi_apply(f.beta + 1.5 * np.eye(4), f.mu)),
    ]
    checks = list(h.checks.values()) + list(f.checks.values())
    slack = max(c.violation for c in checks)
    ok = max(gaps) < 1e-10 and all(c.passed for c in checks) and slack < 1e-10
    record(9, ok, f"beta gaps max={max(gaps):.1e}; {len(checks)} stratum conditions pass={all(c.passed for c in checks)} max slack={slack:.1e}")


def _rk4_order():
    a = get_entry("g_7").build({"zn": 1.0})
    finals = [integrate(a, 1.0, h, sample_every=10**9).grams[-1] for h in (0.1, 0.05, 0.025)]
    return float(np.log2(np.linalg.norm(finals[0] - finals[1]) / np.linalg.norm(finals[1] - finals[2])))


def test_criterion_10_flow_soliton_law():
    traj = integrate(get_entry("g_7").build(), 10.0, 1e-3, sample_every=100)
    gap = float(np.max(np.abs((1 + traj.times) * traj.tr_K + 1)))
    order = _rk4_order()
    ok = gap < 1e-4 and order >= 3.5
    record(
        10,
        ok,
        f"g_7 soliton start, {len(traj.times)} samples max |(1+t) tr K + 1|={gap:.4g} "
        f"((1+t) tr K={traj.tr_K[0]:.12g} at t=0); RK4 order={order:.2f}",
    )


def test_criterion_11_flow_convergence():
    a = get_entry("g_7").build()
    G = np.array(a.gram)
    G[1, 2] = G[2, 1] = 0.2
    traj = integrate(a.with_gram(G), 50.0, 1e-2, normalization="one_plus_t", sample_every=10)
    late = traj.residual[traj.times >= 5.0 - 1e-12]
    monotone = bool(np.all(np.diff(late) <= 0))
    final = float(traj.residual[-1])
    ok = final < 1e-5 and monotone
    record(11, ok, f"perturbed g_7 residual t=0: {traj.residual[0]:.3g}, t=50: {final:.3g}; non-increasing after t=5: {monotone}")


def test_criterion_12_invariances():
    rng = np.random.default_rng(12)
    algebras = [e.build() for e in CATALOG.values()] + [random_algebra(rng, bool(k % 2)) for k in range(20)]
    scale_gap = max(
        float(np.max(np.abs(curvature_report(a.with_gram(2 * a.gram)).K - curvature_report(a).K))) for a in algebras
    )

    equiv_gap = 0.0
    names = ["heisenberg_real", "filiform_n4", "g_7", "s31C", "heisenberg_complex"]
    for k in range(20):
        a = get_entry(names[k % len(names)]).build()
        der = derivation_basis(a)
        D = sum(c * X for c, X in zip(rng.standard_normal(len(der)), der))
        phi = expm(rng.uniform(0.1, 1.0) * D / np.linalg.norm(D))
        G = phi.conj().T @ a.gram @ phi
        K = curvature_report(a).K
        pulled = curvature_report(a.with_gram(0.5 * (G + G.conj().T))).K
        equiv_gap = max(equiv_gap, float(np.max(np.abs(pulled - phi.conj().T @ K @ phi))))

    recover_gap = 0.0
    for name in names:
        a = get_entry(name).build()
        der = derivation_basis(a.mu_frame)
        D0 = sum(c * X for c, X in zip(rng.standard_normal(len(der)), der))
        c0 = -float(rng.uniform(0.5, 2.0))
        c, D, residual, _ = solve_soliton_operator(c0 * np.eye(a.dim) + sym(D0), der)
        recover_gap = max(recover_gap, abs(c - c0), float(np.max(np.abs(sym(D) - sym(D0)))), residual)

    ok = scale_gap < 1e-12 and equiv_gap < 1e-9 and recover_gap < 1e-12
    record(12, ok, f"K(2g)-K(g)={scale_gap:.1e}; exp(tD) equivariance={equiv_gap:.1e}; synthetic recovery={recover_gap:.1e}")
