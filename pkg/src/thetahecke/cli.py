"""Command line front end.

Every command writes a deterministic JSON (or CSV) document, to ``--out``
when given and to stdout otherwise.  Exit codes: 0 when the computation
succeeded and every check held, 1 when a check failed, 2 for usage or
input errors (nothing is written then).
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import identities
from .closed_forms import (
    IndexOutOfRange,
    MixedGenus,
    dual_path_b,
    dual_path_c_tilde,
    verify_commutation,
    verify_eigenform,
    verify_operator_identity,
    verify_vanishing,
)
from .fourier import FourierMap, InsufficientBound, format_rational
from .fqspace import TooLarge, decompose, is_prime, phi_brute, phi_general, phi_regular
from .hecke import HeckeContext, apply_Tp, apply_Tp_squared, apply_Tprime, apply_Ttilde
from .lattice import DividesLevel, IntegralLattice, read_matrix_file, theta_coefficients, theta_series

__all__ = ["main", "build_parser"]

THEOREMS = ("prop21", "prop22", "thm23", "cor24", "thm33", "thm34", "prop31", "prop32")
OPERATORS = ("tp", "ttilde", "tprime", "tp2")


class UsageError(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="theta-hecke", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, lattice=True):
        if lattice:
            p.add_argument("--lattice", action="append", help="Gram matrix file (first line n, then n rows)")
        p.add_argument("--out", help="output file (default: stdout)")
        p.add_argument("--format", choices=("json", "csv"), default="json")

    c = sub.add_parser("theta", help="theta series coefficients of a lattice")
    common(c)
    c.add_argument("--n", type=int, default=1)
    c.add_argument("--bound", type=int, required=True)

    c = sub.add_parser("hecke-apply", help="apply a Hecke operator to a coefficient map")
    common(c)
    c.add_argument("--op", choices=OPERATORS, required=True)
    c.add_argument("--p", type=int, required=True)
    c.add_argument("--j", type=int, default=1)
    c.add_argument("--n", type=int, default=1)
    c.add_argument("--bound", type=int, help="output trace bound (default: the most the input allows)")
    c.add_argument("--in", dest="input", help="input coefficient map (JSON); default theta of --lattice")

    c = sub.add_parser("verify", help="check a closed form, identity or eigenvalue")
    common(c)
    c.add_argument("--theorem", choices=THEOREMS, required=True)
    c.add_argument("--p", type=int, required=True)
    c.add_argument("--n", type=int, default=1)
    c.add_argument("--j", type=int, default=1)
    c.add_argument("--a", type=int, default=1)
    c.add_argument("--bound", type=int, default=4)
    c.add_argument("--op", choices=("tp", "tp2"), default="tp2", help="operator for thm34")

    c = sub.add_parser("identity-check", help="run a grid of exact identities")
    common(c, lattice=False)
    c.add_argument("--theorem", choices=sorted(identities.SUITES) + ["all"], default="all")
    c.add_argument("--p", type=int, action="append", help="restrict the prime grid (repeatable)")
    c.set_defaults(format="csv")

    c = sub.add_parser("phi-count", help="totally isotropic subspaces of L/pL")
    common(c)
    c.add_argument("--p", type=int, required=True)
    c.add_argument("--j", type=int, required=True, help="subspace dimension")

    c = sub.add_parser("witt", help="Witt decomposition of L/pL")
    common(c)
    c.add_argument("--p", type=int, required=True)
    return ap


# ------------------------------------------------------------------ helpers


def _lattices(args) -> list:
    paths = args.lattice or []
    if not paths:
        raise UsageError("--lattice is required")
    out = []
    for path in paths:
        try:
            gram = read_matrix_file(path)
            out.append(IntegralLattice(gram, name=Path(path).stem))
        except (OSError, ValueError) as exc:
            raise UsageError(str(exc)) from exc
    return out


def _one_lattice(args) -> IntegralLattice:
    Ls = _lattices(args)
    if len(Ls) != 1:
        raise UsageError("exactly one --lattice is expected")
    return Ls[0]


def _check_prime(p: int) -> None:
    if not is_prime(p):
        raise UsageError(f"--p {p} is not prime")


def _check_bound(b) -> None:
    if b is not None and b < 0:
        raise UsageError("--bound must be nonnegative")


def _emit(args, text: str) -> None:
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _emit_doc(args, doc: dict, csv_rows: list | None = None, columns=None) -> None:
    if args.format == "json":
        _emit(args, json.dumps(doc, indent=1, sort_keys=True) + "\n")
        return
    rows = csv_rows if csv_rows is not None else [doc]
    cols = columns or sorted({c for r in rows for c in r})
    lines = [",".join(cols)]
    for r in rows:
        lines.append(",".join(_cell(r.get(c, "")) for c in cols))
    _emit(args, "\n".join(lines) + "\n")


def _cell(v) -> str:
    if isinstance(v, dict):
        return " ".join(f"{k}={_cell(x)}" for k, x in sorted(v.items()))
    if isinstance(v, (list, tuple)):
        return ";".join(" ".join(str(x) for x in r) if isinstance(r, (list, tuple)) else str(r) for r in v)
    return str(v)


def _emit_report(args, report, key: str) -> int:
    doc = report.to_dict()
    doc["theorem"] = key
    if args.format == "json":
        _emit(args, json.dumps(doc, indent=1, sort_keys=True) + "\n")
    else:
        _emit(args, report.to_csv())
    return 0 if report.passed else 1


def _threads_hint() -> None:
    raw = os.environ.get("THETA_HECKE_THREADS")
    if not raw:
        return
    try:
        n = int(raw)
    except ValueError:
        raise UsageError("THETA_HECKE_THREADS must be a positive integer")
    if n < 1:
        raise UsageError("THETA_HECKE_THREADS must be a positive integer")
    import numba

    numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))


# ------------------------------------------------------------------ commands


def cmd_theta(args) -> int:
    L = _one_lattice(args)
    _check_bound(args.bound)
    if not 1 <= args.n <= L.rank:
        raise UsageError("--n must lie in [1, rank]")
    F = theta_coefficients(L, args.n, args.bound)
    _emit(args, F.to_json() if args.format == "json" else F.to_csv())
    return 0


def cmd_hecke_apply(args) -> int:
    L = _one_lattice(args)
    _check_prime(args.p)
    _check_bound(args.bound)
    try:
        ctx = HeckeContext.for_lattice(L, args.p)
    except (DividesLevel, ValueError) as exc:
        raise UsageError(str(exc)) from exc
    if args.input:
        try:
            F = FourierMap.from_json(Path(args.input).read_text())
        except (OSError, ValueError, KeyError, TypeError) as exc:
            raise UsageError(f"cannot read coefficient map {args.input}: {exc}") from exc
        if F.k != L.k:
            raise UsageError("input map weight does not match the lattice")
    else:
        if args.bound is None:
            raise UsageError("--bound is required when no --in map is given")
        factor = args.p if args.op == "tp" else args.p * args.p
        F = theta_series(L, args.n).truncate(factor * args.bound)
    p = args.p
    if args.op == "tp":
        G = apply_Tp(F, ctx, p, args.bound)
    elif args.op == "ttilde":
        G = apply_Ttilde(F, ctx, p, args.j, args.bound)
    elif args.op == "tprime":
        G = apply_Tprime(F, ctx, p, args.j, args.bound)
    else:
        G = apply_Tp_squared(F, ctx, p, args.bound)
    _emit(args, G.to_json() if args.format == "json" else G.to_csv())
    return 0


def cmd_verify(args) -> int:
    _check_prime(args.p)
    _check_bound(args.bound)
    key = args.theorem
    Ls = _lattices(args)
    L = Ls[0]
    if key != "cor24" and key != "thm34" and len(Ls) != 1:
        raise UsageError(f"{key} takes exactly one --lattice")
    if not 1 <= args.n <= L.rank:
        raise UsageError("--n must lie in [1, rank]")
    p, n, j, b = args.p, args.n, args.j, args.bound
    if key == "prop21":
        if not 1 <= j <= n:
            raise UsageError("prop21 needs 1 <= j <= n")
        report = dual_path_c_tilde(L, p, n, j, b)
    elif key == "prop22":
        report = dual_path_b(L, p, n, j, b)
    elif key == "thm23":
        report = verify_commutation(L, p, j, n, b)
    elif key == "cor24":
        report = verify_eigenform(Ls, p, n, b, "tprime", j)
    elif key == "thm34":
        report = verify_eigenform(Ls, p, n, b, args.op, j)
    elif key == "thm33":
        report = verify_vanishing(L, p, j, n, b)
    elif key == "prop31":
        report = verify_operator_identity("prop31", L, p, n, b, args.a)
    else:
        report = verify_operator_identity("prop32", L, p, n, b, j)
    return _emit_report(args, report, key)


def cmd_identity_check(args) -> int:
    names = sorted(identities.SUITES) if args.theorem == "all" else [args.theorem]
    primes = sorted(set(args.p)) if args.p else None
    for p in primes or []:
        _check_prime(p)
    rows = []
    passed = True
    for name in names:
        kwargs = {}
        if primes is not None and name != "char2":
            kwargs["primes"] = tuple(primes)
        report = identities.run_suite(name, **kwargs)
        passed &= report.passed
        for r in report.rows:
            rows.append({"suite": name, **r})
    failures = [r for r in rows if not r["ok"]]
    for r in failures[:100]:
        print(f"violation: {r['suite']} {r['identity']} {_cell(r['params'])}: {r['lhs']} != {r['rhs']}",
              file=sys.stderr)
    cols = ["suite", "identity", "params", "lhs", "rhs", "ok"]
    if args.format == "json":
        _emit_doc(args, {"suites": names, "passed": passed, "rows": rows, "violations": len(failures)})
    else:
        _emit_doc(args, {}, rows, cols)
    return 0 if passed else 1


def _space_doc(L: IntegralLattice, p: int) -> dict:
    V = L.mod_p_space(p)
    wd = decompose(V)
    doc = {
        "lattice": [list(r) for r in L.gram],
        "p": p,
        "dim": V.dim,
        "rad_dim": wd.rad_dim,
        "hyp_count": wd.hyp_count,
        "residual": wd.residual.name,
        "level": L.level,
    }
    if L.level % p:
        doc["chi"] = L.character_at(p)
    return doc


def cmd_phi_count(args) -> int:
    L = _one_lattice(args)
    _check_prime(args.p)
    if args.j < 0:
        raise UsageError("--j must be nonnegative")
    doc = _space_doc(L, args.p)
    V = L.mod_p_space(args.p)
    closed = phi_general(V, args.j)
    doc["ell"] = args.j
    doc["closed_form"] = format_rational(closed)
    if decompose(V).regular:
        doc["regular_formula"] = format_rational(phi_regular(decompose(V), args.j, args.p))
    try:
        brute = phi_brute(V, args.j)
        doc["enumerated"] = format_rational(brute)
        doc["ok"] = closed == brute
    except TooLarge:
        doc["enumerated"] = None
        doc["ok"] = True
    _emit_doc(args, doc)
    return 0 if doc["ok"] else 1


def cmd_witt(args) -> int:
    L = _one_lattice(args)
    _check_prime(args.p)
    _emit_doc(args, _space_doc(L, args.p))
    return 0


COMMANDS = {
    "theta": cmd_theta,
    "hecke-apply": cmd_hecke_apply,
    "verify": cmd_verify,
    "identity-check": cmd_identity_check,
    "phi-count": cmd_phi_count,
    "witt": cmd_witt,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        _threads_hint()
        return COMMANDS[args.command](args)
    except (UsageError, IndexOutOfRange, MixedGenus, DividesLevel, InsufficientBound) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
