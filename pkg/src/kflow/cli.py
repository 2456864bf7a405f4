"""Command-line front end.

Exit codes: 0 certified or ok, 1 error, 2 rejected, 3 inconclusive.
"""

import argparse
import dataclasses
import io as _io
import json
import sys
from pathlib import Path

import numpy as np

from . import catalog
from .catalog import EXIT_ERROR, EXIT_INCONCLUSIVE, EXIT_OK, EXIT_REJECTED
from .config import DEFAULT_TOL
from .errors import KFlowError, SchemaError
from .flow import integrate
from .io import algebra_to_dict, dumps, load_algebra
from .soliton import ALGEBRAIC, SEMI, build_standard_solvable, solve_soliton

_STATUS_CODE = {"certified": EXIT_OK, "rejected": EXIT_REJECTED, "inconclusive": EXIT_INCONCLUSIVE}


def _parse_params(items):
    params = {}
    for item in items or []:
        key, sep, value = item.partition("=")
        if not sep:
            raise ValueError(f"--param expects key=value, got {item!r}")
        params[key.strip()] = complex(value.strip().replace(" ", "").replace("i", "j"))
    return params


def _load_matrices(path):
    doc = json.loads(Path(path).read_text())
    if isinstance(doc, dict):
        doc = doc.get("actions", [])
    mats = []
    for m in doc:
        rows = [[complex(x.get("re", 0.0), x.get("im", 0.0)) if isinstance(x, dict) else x for x in row] for row in m]
        arr = np.array(rows)
        if np.iscomplexobj(arr) and not np.any(arr.imag):
            arr = arr.real
        mats.append(arr)
    if not mats:
        raise SchemaError("actions file holds no matrices")
    return mats


def _summary(obj, indent=""):
    """Compact plain-text rendering of a nested report."""
    lines = []
    for key in sorted(obj):
        val = obj[key]
        if isinstance(val, dict) and not set(val) <= {"re", "im"}:
            lines.append(f"{indent}{key}:")
            lines.extend(_summary(val, indent + "  "))
        else:
            lines.append(f"{indent}{key}: {json.dumps(val)}")
    return lines


class _Emitter:
    def __init__(self, args):
        self.json = args.json
        self.out = args.out

    def __call__(self, report):
        text = dumps(report) if self.json else "\n".join(_summary(report))
        if self.out:
            Path(self.out).write_text(text + "\n")
        else:
            print(text)


def cmd_analyze(args, tol, emit):
    a = load_algebra(args.file, tol)
    _, report = catalog.analyze_algebra(a, tol)
    emit(report)
    return EXIT_OK


def cmd_soliton(args, tol, emit):
    a = load_algebra(args.file, tol)
    mode = ALGEBRAIC if args.mode == "algebraic" else SEMI
    cert = solve_soliton(a, mode, tol)
    emit(cert.to_dict())
    return _STATUS_CODE.get(cert.status, EXIT_ERROR)


def cmd_stratum(args, tol, emit):
    a = load_algebra(args.file, tol)
    emit(catalog.nilradical_stratum(a, tol))
    return EXIT_OK


def cmd_flow(args, tol, emit):
    a = load_algebra(args.file, tol)
    traj = integrate(a, args.t_max, args.step, args.normalize, args.sample_every, tol)
    if args.out:
        traj.write_csv(args.out)
    else:
        buf = _io.StringIO()
        traj.write_csv(buf)
        sys.stdout.write(buf.getvalue())
    if args.json:
        summary = {
            "samples": int(len(traj.times)),
            "t_final": float(traj.times[-1]),
            "residual_final": float(traj.residual[-1]),
            "tr_K_final": float(traj.tr_K[-1]),
            "normalization": traj.normalization,
            "step": traj.meta["step"],
        }
        print(dumps(summary), file=sys.stderr)
    return EXIT_OK


def cmd_catalog(args, tol, emit):
    if args.action == "list":
        emit({name: status for name, status in catalog.catalog_list()})
        return EXIT_OK
    if args.action == "verify-all":
        results = catalog.verify_all(tol)
        emit({name: {"exit": code, "report": rep} for name, (code, rep) in results.items()})
        codes = {code for code, _ in results.values()}
        return EXIT_ERROR if EXIT_ERROR in codes else EXIT_OK
    if not args.name:
        raise ValueError(f"catalog {args.action} needs an entry name")
    params = _parse_params(args.param)
    if args.action == "show":
        emit(catalog.show(args.name, params))
        return EXIT_OK
    code, report = catalog.run_verify(args.name, params, tol)
    emit(report)
    return code


def cmd_build_solvable(args, tol, emit):
    nil = load_algebra(args.nil, tol)
    actions = _load_matrices(args.actions)
    a = build_standard_solvable(nil, actions, args.c, tol)
    emit(algebra_to_dict(a))
    return EXIT_OK


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol-cert", type=float, default=None, help="certification threshold on the residual")
    common.add_argument("--json", action="store_true", help="emit JSON instead of a text summary")
    common.add_argument("--out", help="write the report (or CSV) to this path")

    p = argparse.ArgumentParser(prog="kflow", description="Solitons of curvature flows on metric Lie algebras.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("analyze", parents=[common], help="curvature, soliton and structure report")
    s.add_argument("file")
    s.set_defaults(func=cmd_analyze)

    s = sub.add_parser("soliton", parents=[common], help="least-squares soliton certificate")
    s.add_argument("file")
    s.add_argument("--mode", choices=["semi", "algebraic"], default="semi")
    s.set_defaults(func=cmd_soliton)

    s = sub.add_parser("stratum", parents=[common], help="stratum label of the nilradical")
    s.add_argument("file")
    s.set_defaults(func=cmd_stratum)

    s = sub.add_parser("flow", parents=[common], help="integrate the flow and write a CSV trajectory")
    s.add_argument("file")
    s.add_argument("--t-max", type=float, required=True)
    s.add_argument("--step", type=float, default=1e-3)
    s.add_argument("--normalize", choices=["none", "one-plus-t", "unit-norm"], default="none")
    s.add_argument("--sample-every", type=int, default=10)
    s.set_defaults(func=cmd_flow)

    s = sub.add_parser("catalog", parents=[common], help="built-in algebras")
    s.add_argument("action", choices=["list", "show", "verify", "verify-all"])
    s.add_argument("name", nargs="?")
    s.add_argument("--param", action="append", metavar="KEY=VALUE")
    s.set_defaults(func=cmd_catalog)

    s = sub.add_parser("build-solvable", parents=[common], help="standard solvable extension of a nilsoliton")
    s.add_argument("--nil", required=True)
    s.add_argument("--actions", required=True)
    s.add_argument("--c", type=float, default=None)
    s.set_defaults(func=cmd_build_solvable)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    tol = DEFAULT_TOL
    if args.tol_cert is not None:
        tol = dataclasses.replace(tol, cert=args.tol_cert)
    try:
        return args.func(args, tol, _Emitter(args))
    except (KFlowError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
