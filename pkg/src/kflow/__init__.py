"""Curvature flows and their solitons on metric Lie algebras."""

from .algebra import (
    MetricLieAlgebra,
    ad_operator,
    adapted_unitary_basis,
    derivation_basis,
    killing_form,
    nilradical,
    one_one_part,
    orthogonal_decomposition,
    realify,
    reductive_split,
)
from .catalog import catalog_list, run_verify
from .config import DEFAULT_TOL, Tolerances
from .curvature import curvature_report, mean_curvature, moment_tensor
from .flow import integrate, soliton_residual
from .io import load_algebra
from .soliton import build_standard_solvable, solve_soliton, verify_structure
from .stratify import compute_beta, gl_apply, lemma_E_terms, min_norm_point, moment_pairing, pi_apply, stratum_checks

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_TOL",
    "MetricLieAlgebra",
    "Tolerances",
    "ad_operator",
    "adapted_unitary_basis",
    "build_standard_solvable",
    "catalog_list",
    "compute_beta",
    "curvature_report",
    "derivation_basis",
    "gl_apply",
    "integrate",
    "killing_form",
    "lemma_E_terms",
    "load_algebra",
    "mean_curvature",
    "min_norm_point",
    "moment_pairing",
    "moment_tensor",
    "nilradical",
    "one_one_part",
    "orthogonal_decomposition",
    "pi_apply",
    "realify",
    "reductive_split",
    "run_verify",
    "soliton_residual",
    "solve_soliton",
    "stratum_checks",
    "verify_structure",
]
