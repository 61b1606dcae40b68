"""Command-line interface: ``blowupgw <command> ...``.

Exit status 0 on success, 1 when a verification fails, 2 for malformed
input and 3 when the requested invariant is outside the reach of the
target's recursion.
"""

from __future__ import annotations

import argparse
import os
import sys
from fractions import Fraction

from . import derived, verify
from .engine import CacheError, UnsupportedStrategy, Workspace
from .homology import parse_curve_class
from .ring import (RingError, abelian_surface_ring, build_blowup_point_ring,
                   curve_secant_ring, format_rational, load_bundled_ring, parse_ring_file)
from .wdvv import CycleError


class UsageError(ValueError):
    pass


# ---------------------------------------------------------------------------
# argument helpers

def class_name(t, token):
    """Resolve a class token (H<k>, E<i>.<k>, E<i>, pt, one, or a ring basis name)."""
    if token in t.index:
        return token
    if t.is_point_blowup:
        r = t.dim
        if token.startswith("H") and token[1:].isdigit():
            k = int(token[1:])
            if k == 0:
                return "one"
            if k == 1:
                return "H"
            if k == r:
                return "pt"
        elif token.startswith("E") and token[1:].isdigit():
            return f"E{token[1:]}.1"
    raise UsageError(f"unknown class {token!r} for target {t.name}")


def parse_classes(t, text):
    """``pt^6,H2,E1.2^3`` -> list of basis names (empty string or '-' for none)."""
    out = []
    text = (text or "").strip()
    if text in ("", "-", "1"):
        return out
    for tok in text.split(","):
        tok = tok.strip()
        name, _, mult = tok.partition("^")
        try:
            m = int(mult) if mult else 1
        except ValueError:
            raise UsageError(f"bad multiplicity in {tok!r}") from None
        if m < 0:
            raise UsageError(f"negative multiplicity in {tok!r}")
        out.extend([class_name(t, name)] * m)
    return out


def parse_params(items):
    params = {}
    for item in items or ():
        k, sep, v = item.partition("=")
        if not sep:
            raise UsageError(f"parameter {item!r} must look like name=value")
        try:
            params[k.strip()] = Fraction(v.strip())
        except ValueError:
            raise UsageError(f"bad parameter value in {item!r}") from None
    return params


def _int_param(params, k):
    v = params.get(k)
    if v is None or v.denominator != 1:
        raise UsageError(f"target needs an integer parameter {k}=...")
    return int(v)


def load_target(args):
    if args.ring:
        with open(args.ring, encoding="utf-8") as fh:
            text = fh.read()
        return parse_ring_file(text, parse_params(args.param))
    if args.target:
        params = parse_params(args.param)
        if args.target == "curvesec":
            return curve_secant_ring(_int_param(params, "d"), _int_param(params, "g"))
        if args.target == "surfsec":
            return abelian_surface_ring()
        return load_bundled_ring(args.target, **params)
    if args.r is None:
        raise UsageError("give --r (and --s) or --ring/--target")
    if args.r < 2 or args.s < 0:
        raise UsageError("need r >= 2 and s >= 0")
    return build_blowup_point_ring(args.r, args.s)


def enumerative_reading(t, beta, names):
    """Plain-language meaning of the invariant when it is known to count curves."""
    if not t.is_point_blowup or beta[0] <= 0 or any(e > 0 for e in beta[1:]):
        return None
    if any(t.basis[t.index[n]].exc for n in names):
        return None
    r, d = t.dim, beta[0]
    mults = [-e for e in beta[1:]]
    if t.s == 1:
        pass
    elif r == 3 and t.s == 4 and all(n == "pt" for n in names):
        nz = [m for m in mults if m]
        if d >= 2 and len(nz) == 2 and nz[0] == nz[1] == d:
            return None
    else:
        return None
    through = ", ".join(f"{names.count(n)} x {n}" for n in sorted(set(names))) or "no conditions"
    at = "; ".join(f"multiplicity {m} at P{i}" for i, m in enumerate(mults, 1) if m)
    text = (f"enumerative: number of irreducible rational curves of degree {d} in P^{r} "
            f"meeting generic representatives of ({through})")
    return text + (f", with {at}" if at else "")


# ---------------------------------------------------------------------------
# commands

def cmd_gw(args, ws, out):
    t = load_target(args)
    try:
        beta = parse_curve_class(args.beta, t)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    names = parse_classes(t, args.classes)
    eng = ws.engine(t)
    value = eng.gw(beta, names)
    out.write(format_rational(value) + "\n")
    if args.explain:
        reading = enumerative_reading(t, beta, names)
        if reading:
            out.write(reading + "\n")
    return 0


def cmd_table(args, ws, out):
    table = derived.make_table(args.id, dmax=args.dmax, workers=args.workers, ws=ws)
    out.write(table.to_tsv() if args.format == "tsv" else table.to_markdown())
    return 0


def cmd_tangency(args, ws, out):
    t = build_blowup_point_ring(args.r, 1)
    if args.pattern is None:
        try:
            T = derived.default_tangency_classes(args.r, args.d, args.k)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    else:
        T = tuple(parse_classes(t, args.pattern))
    try:
        v = derived.tangency_count(derived.TangencyQuery(args.r, args.d, args.k, T), ws)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    out.write(format_rational(v) + "\n")
    return 0


def cmd_secant(args, ws, out):
    if args.d < 1 or args.g < 0:
        raise UsageError("need d >= 1 and g >= 0")
    t, q = derived.secant_numbers(args.d, args.g, ws)
    out.write(f"t={format_rational(t)} q={format_rational(q)}\n")
    if args.all:
        for e, cl, v, _ in derived.secant_list(args.d, args.g, ws):
            out.write(f"GW(H'{e:+d}E'; {','.join(cl) or '1'}) = {format_rational(v)}\n")
    return 0


def cmd_abelian(args, ws, out):
    out.write(format_rational(derived.abelian_sixsecants(ws)) + "\n")
    return 0


_SUITE_TARGETS = ((2, 2), (3, 1), (3, 2))


def cmd_verify(args, ws, out):
    suites = ["vanishing", "ptexc", "residual", "divisor", "permutation", "tables"] \
        if args.suite == "all" else [args.suite]
    reports = []
    for suite in suites:
        if suite == "tables":
            ids = [args.id] if args.id else list(verify.TABLE_IDS)
            for tid in ids:
                dmax = args.dmax or derived.DEFAULT_DMAX[tid]
                reports.append(verify.regress_tables(tid, dmax=dmax,
                                                     workers=args.workers, ws=ws))
            continue
        fn = getattr(verify, f"{suite}_suite")
        for r, s in _SUITE_TARGETS:
            if suite == "permutation" and s < 2:
                continue
            reports.append(fn(ws.point_blowup(r, s), args.samples, args.seed))
    bad = 0
    for rep in reports:
        out.write(rep.summary() + "\n")
        for f in rep.failures:
            out.write(f"  {f}\n")
        bad += len(rep.failures)
    return 1 if bad else 0


def cmd_cache_info(args, ws, out):
    if not args.cache:
        raise UsageError("no cache directory (use --cache or GW_CACHE)")
    if not os.path.isdir(args.cache):
        out.write(f"{args.cache}: no cache yet\n")
        return 0
    for fn in sorted(os.listdir(args.cache)):
        if not fn.endswith(".gwcache"):
            continue
        path = os.path.join(args.cache, fn)
        with open(path, encoding="utf-8") as fh:
            header = fh.readline().strip()
            n = sum(1 for line in fh if line.strip())
        out.write(f"{fn}\t{n} records\t{header}\n")
    return 0


# ---------------------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(
        prog="blowupgw",
        description="Genus-zero Gromov-Witten invariants of blow-ups of projective space.")
    p.add_argument("--cache", default=os.environ.get("GW_CACHE"),
                   help="directory of persisted invariants (default: $GW_CACHE)")
    p.add_argument("--workers", type=int, default=1, help="threads for table cells")
    p.add_argument("--vanishing", action="store_true",
                   help="short-cut keys certified zero by the vanishing theorem")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gw", help="a single invariant")
    g.add_argument("--r", type=int)
    g.add_argument("--s", type=int, default=0)
    g.add_argument("--ring", help="ring file of a custom target")
    g.add_argument("--target", help="bundled ring: curvesec or surfsec")
    g.add_argument("--param", action="append", help="ring parameter name=value")
    g.add_argument("--beta", required=True, help="curve class d,e1,...,es (or a,b)")
    g.add_argument("--classes", default="", help="e.g. pt^6,H2,E1.2^3")
    g.add_argument("--explain", action="store_true", help="print the enumerative reading")
    g.set_defaults(func=cmd_gw)

    t = sub.add_parser("table", help="one of the standard tables")
    t.add_argument("--id", required=True, choices=sorted(derived.TABLES))
    t.add_argument("--dmax", type=int)
    t.add_argument("--format", choices=("tsv", "md"), default="md")
    t.set_defaults(func=cmd_table)

    tg = sub.add_parser("tangency", help="curves tangent to a linear space at a point")
    tg.add_argument("--r", type=int, required=True)
    tg.add_argument("--k", type=int, required=True)
    tg.add_argument("--d", type=int, required=True)
    tg.add_argument("--pattern", help="insertions (default: points plus one H^j)")
    tg.set_defaults(func=cmd_tangency)

    sc = sub.add_parser("secant", help="trisecant and quadrisecant numbers of a space curve")
    sc.add_argument("--d", type=int, required=True)
    sc.add_argument("--g", type=int, required=True)
    sc.add_argument("--all", action="store_true", help="also list the intermediate invariants")
    sc.set_defaults(func=cmd_secant)

    ab = sub.add_parser("abelian", help="6-secant lines of an abelian surface in P^4")
    ab.set_defaults(func=cmd_abelian)

    v = sub.add_parser("verify", help="consistency and regression checks")
    v.add_argument("--suite", default="all",
                   choices=("all", "residual", "tables", "ptexc", "vanishing", "divisor",
                            "permutation"))
    v.add_argument("--samples", type=int, default=50)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--id", choices=sorted(derived.TABLES), help="restrict the tables suite")
    v.add_argument("--dmax", type=int, help="largest degree for the tables suite")
    v.set_defaults(func=cmd_verify)

    ci = sub.add_parser("cache-info", help="summarize the cache directory")
    ci.set_defaults(func=cmd_cache_info)
    return p


def main(argv=None, out=None):
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.workers < 1:
        parser.error("--workers must be positive")
    ws = Workspace(cache_dir=args.cache, use_vanishing=args.vanishing)
    try:
        code = args.func(args, ws, out)
        if args.command != "cache-info":
            ws.save()
        return code
    except (UsageError, RingError, OSError, ValueError) as exc:
        print(f"blowupgw: error: {exc}", file=sys.stderr)
        return 2
    except CacheError as exc:
        print(f"blowupgw: cache error: {exc}", file=sys.stderr)
        return 2
    except (UnsupportedStrategy, CycleError) as exc:
        print(f"blowupgw: unsupported: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
