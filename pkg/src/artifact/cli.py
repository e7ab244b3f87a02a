"""Command-line interface (``python -m artifact`` or the ``artifact`` script)."""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import __version__
from .cocycle import ingest_newforms, validate_divisor, weight
from .io import (
    append_record,
    cache_ops,
    data_path,
    dump_record,
    export_table,
    parse_divisor_label,
    read_records,
)
from .jobs import DEFAULT_DIGITS, JobError, JobSpec, run_job
from .padic import make_context, QuadExtScalar
from .paths import COSET_REPS, PathChain, identity
from .points import build_atr_fields
from .quadspace import sigma0_array
from .recognition import abelianity_diagnostics, algdep, allowed_primes
from .cocycle import sigma4


def _common(p: argparse.ArgumentParser, *names: str) -> None:
    opts = {
        "p": dict(type=int, help="prime p = 1 mod 4"),
        "prec": dict(type=int, default=DEFAULT_DIGITS, help="p-adic digits"),
        "divisor": dict(help="divisor label such as 6_24_even"),
        "type": dict(choices=("smallRM", "smallCM", "bigATR"), default="bigATR"),
        "D": dict(type=int, help="discriminant of the special point"),
        "n": dict(type=int, default=1, help="ATR twist parameter"),
        "char": dict(choices=("triv", "conj", "both"), default="both"),
        "newforms": dict(help="newform coefficient file (defaults to the bundled one)"),
        "units": dict(help="file of precomputed units"),
        "cache-dir": dict(help="directory for enumeration caches"),
        "extended": dict(action="store_true", help="allow precision beyond the desk-scale default cap"),
    }
    for name in names:
        p.add_argument(f"--{name}", **opts[name])


def _newforms(args):
    path = args.newforms
    if path is None:
        cand = data_path(f"newforms_{4 * args.p}.txt")
        path = cand if cand.exists() else None
    return ingest_newforms(path, args.p) if path else None


def cmd_validate_divisor(args) -> int:
    D = parse_divisor_label(args.divisor)
    rep = validate_divisor(D, _newforms(args), args.p)
    out = {
        "divisor": args.divisor,
        "cond1": list(rep.cond1),
        "cond2": {k: list(v) for k, v in rep.cond2.items()},
        "odd_level_weights": list(rep.weights_odd) if rep.weights_odd else None,
        "passed": rep.passed,
    }
    print(json.dumps(out, indent=2, sort_keys=True))
    return 0 if rep.passed else 1


def cmd_enum_sigma(args) -> int:
    arr = sigma0_array(args.d, args.v, args.p)
    print(json.dumps({"p": args.p, "d": args.d, "v": args.v, "rows": int(arr.shape[0])}))
    for row in arr[: args.show].tolist():
        x, y, b, c = row
        print(f"[{x}{'+' if y >= 0 else '-'}{abs(y)}i; {b}, {c}]")
    return 0


def cmd_weights(args) -> int:
    ds = [args.d] if args.d else [d for d, _ in parse_divisor_label(args.divisor).terms]
    for d in ds:
        for v in args.v:
            w0 = weight(d, v, PathChain(((1, identity(), 0),)), args.p)
            wg = weight(d, v, PathChain(((1, COSET_REPS[2], 0),)), args.p) if args.sign_law else None
            s = sigma4(d * args.p**v)
            rec = {"d": d, "v": v, "weight": w0, "sigma": s, "C": str(Fraction(w0, s))}
            if wg is not None:
                rec["weight_g0_ginf"] = wg
            print(dump_record(rec))
    return 0


def cmd_eval(args) -> int:
    try:
        spec = _eval_spec(args)
    except ValueError as exc:
        print(f"[arguments] {exc}", file=sys.stderr)
        return 2
    try:
        rec = run_job(spec)
    except JobError as exc:
        print(str(exc), file=sys.stderr)
        return 2
    if args.store:
        append_record(args.store, rec)
    print(dump_record(rec))
    return 0


def _eval_spec(args) -> JobSpec:
    return JobSpec(
        label=args.divisor,
        type=args.type,
        p=args.p,
        D=args.D,
        n=args.n,
        digits=args.prec,
        char=args.char,
        cache_dir=args.cache_dir,
        newforms=args.newforms,
        units=args.units,
        extended=args.extended,
        branch=tuple(args.branch),
        max_level=args.max_level,
    )


def cmd_recognize(args) -> int:
    ctx = make_context(args.p, args.prec, 0)
    a, _, b = args.value.partition(",")
    x = QuadExtScalar.from_rationals(ctx, Fraction(a), Fraction(b or 0))
    rec = algdep(x, ctx, max_deg=args.max_deg, slack=args.slack)
    print(dump_record(rec.to_record()))
    return 0 if rec.recognized else 1


def cmd_allowed_primes(args) -> int:
    data = build_atr_fields(args.D, args.n)
    S = [d for d, _ in parse_divisor_label(args.divisor).terms]
    rep = allowed_primes(S, data.q, args.p, data)
    out = rep.to_record()
    out["counts"] = {
        "allowed": len(rep.allowed),
        "filtered": len(rep.filtered),
        "max": max(rep.allowed, default=None),
        "above_10000": sum(1 for l in rep.allowed if l > 10000),
    }
    print(json.dumps(out, sort_keys=True))
    return 0


def cmd_diagnostics(args) -> int:
    poly = [int(c) for c in args.poly.split(",")]
    E = None
    if args.D is not None:
        E = list(reversed(build_atr_fields(args.D, args.n).E_poly))
    print(json.dumps(abelianity_diagnostics(poly, E), sort_keys=True))
    return 0


def cmd_cache(args) -> int:
    if not args.cache_dir:
        print("--cache-dir is required", file=sys.stderr)
        return 2
    ds = [args.d] if args.d else [d for d, _ in parse_divisor_label(args.divisor).terms]
    keys = [(d, v) for d in ds for v in args.v]
    res = cache_ops(args.op, args.cache_dir, args.p, keys)
    print(json.dumps(res, sort_keys=True))
    return 0 if all(v not in ("mismatch", "missing-or-corrupt") for v in res.values()) else 1


def cmd_export(args) -> int:
    recs = read_records(args.store)
    out = open(args.out, "w", encoding="utf-8") if args.out else sys.stdout
    try:
        export_table(recs, out, p=args.p, recognized_only=not args.all)
    finally:
        if args.out:
            out.close()
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="artifact", description=__doc__)
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="cmd", required=True)

    s = sub.add_parser("validate-divisor", help="check the weight and newform conditions")
    _common(s, "p", "divisor", "newforms")
    s.set_defaults(func=cmd_validate_divisor)

    s = sub.add_parser("enum-sigma", help="enumerate Sigma_{d,v}(0, oo)")
    _common(s, "p")
    s.add_argument("--d", type=int, required=True)
    s.add_argument("--v", type=int, default=0)
    s.add_argument("--show", type=int, default=10)
    s.set_defaults(func=cmd_enum_sigma)

    s = sub.add_parser("weights", help="weights on (0, oo) and their ratio to sigma")
    _common(s, "p", "divisor")
    s.add_argument("--d", type=int)
    s.add_argument("--v", type=int, nargs="+", default=[0])
    s.add_argument("--sign-law", action="store_true", help="also report the (g0, goo) weight")
    s.set_defaults(func=cmd_weights)

    s = sub.add_parser("eval", help="evaluate J at a special point and recognize it")
    _common(s, "p", "prec", "divisor", "type", "D", "n", "char", "newforms", "units", "cache-dir", "extended")
    s.add_argument("--branch", type=int, nargs=2, default=[0, 0])
    s.add_argument("--max-level", type=int, default=3)
    s.add_argument("--store", help="append the record to this result file")
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("recognize", help="algebraic recognition of a value a + b*omega")
    _common(s, "p", "prec")
    s.add_argument("--value", required=True, help="a or a,b (rationals)")
    s.add_argument("--max-deg", type=int, default=8)
    s.add_argument("--slack", type=int, default=5)
    s.set_defaults(func=cmd_recognize)

    s = sub.add_parser("allowed-primes", help="primes allowed by the support criterion")
    _common(s, "p", "divisor", "D", "n")
    s.set_defaults(func=cmd_allowed_primes)

    s = sub.add_parser("diagnostics", help="degree and ramification of a recognized value")
    _common(s, "D", "n")
    s.add_argument("--poly", required=True, help="coefficients from the constant term up, comma separated")
    s.set_defaults(func=cmd_diagnostics)

    s = sub.add_parser("cache", help="build, verify or purge enumeration caches")
    s.add_argument("op", choices=("build", "verify", "purge"))
    _common(s, "p", "divisor", "cache-dir")
    s.add_argument("--d", type=int)
    s.add_argument("--v", type=int, nargs="+", default=[0])
    s.set_defaults(func=cmd_cache)

    s = sub.add_parser("export", help="export stored records as a table")
    _common(s, "p")
    s.add_argument("--store", required=True)
    s.add_argument("--out")
    s.add_argument("--all", action="store_true", help="include unrecognized records")
    s.set_defaults(func=cmd_export)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"[arguments] {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
