"""Command-line front end.

Every numeric value leaves the program as a string holding an exact rational;
intervals become [lo, hi] pairs of such strings.  Exit codes: 0 for results
(including UNDECIDED), 1 for operational failures such as exhausted precision,
2 for usage errors, 3 when a certified inequality or identity is violated.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import random
import sys
from enum import Enum
from fractions import Fraction
from typing import List, Optional

from . import SCHEMA, config
from .errors import IdentityViolated, IdeoError, MalformedSpec, MembershipFailed
from .gdcalc import GDClass, Order, Verdict, class_from_spec
from .interval import Interval

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_VIOLATED = 0, 1, 2, 3


class Violation(Exception):
    """A certified inequality from the theory failed; carries the witness."""

    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


# ---------------------------------------------------------------------------
# serialization


def to_jsonable(obj):
    if isinstance(obj, Interval):
        return [str(obj.lo), str(obj.hi)]
    if isinstance(obj, bool) or obj is None:
        return obj
    if isinstance(obj, (int, Fraction)):
        return str(obj)
    if isinstance(obj, float):
        raise TypeError("bare floats are never emitted")
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, Verdict):
        return to_jsonable(obj.to_json())
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if hasattr(obj, "to_json"):
        return to_jsonable(obj.to_json())
    return str(obj)


def emit_report(result: dict, fmt: str = "json", header: bool = True) -> str:
    """Render a result.

    json: compact, insertion-ordered, with the schema tag first.
    csv: needs 'columns' and 'rows' in the result; other results become key,value lines.
    text: one 'key: value' line per field.
    """
    body = to_jsonable(result)
    if fmt == "json":
        out = {"schema": SCHEMA, **body} if header else body
        return json.dumps(out, ensure_ascii=False, separators=(",", ":")) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        if "columns" in result and "rows" in result:
            w.writerow(result["columns"])
            w.writerows(body["rows"])
        else:
            w.writerow(["key", "value"])
            for k, v in body.items():
                w.writerow([k, v if isinstance(v, str) else json.dumps(v, ensure_ascii=False, separators=(",", ":"))])
        return buf.getvalue()
    if fmt == "text":
        lines = [f"# {SCHEMA}"] if header else []
        for k, v in body.items():
            if k == "rows" and "columns" in body:
                lines.append("  ".join(body["columns"]))
                lines.extend("  ".join(map(str, r)) for r in v)
            elif k != "columns":
                lines.append(f"{k}: {v if isinstance(v, str) else json.dumps(v, ensure_ascii=False)}")
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown format {fmt!r}")


# ---------------------------------------------------------------------------
# helpers


def _src(spec: str):
    from .reals import make_source

    return make_source(spec)


def _poly(text: str):
    from .poly import parse_poly

    return parse_poly(text)


def _window(mu: str, nu: str):
    from .ideology import FiltrationWindow

    return FiltrationWindow(class_from_spec(mu), class_from_spec(nu))


def _class_terms(c: GDClass, depth: int) -> list:
    return [c.term(i) for i in range(1, depth + 1)]


def _denoms(args, x):
    from .ideology import denominator_list

    return denominator_list(x, args.denoms, args.count)


# ---------------------------------------------------------------------------
# commands; each returns a result dict


def cmd_cf(args) -> dict:
    from .reals import convergents, partial_quotients

    x = _src(args.src)
    cs = convergents(x, args.count)
    terms = partial_quotients(x, args.count)
    rows = [[str(c.index), str(a), str(c.p), str(c.q)] for c, a in zip(cs, terms)]
    return {"command": "cf", "source": x.label, "columns": ["i", "a", "p", "q"], "rows": rows}


def cmd_attach(args) -> dict:
    from .ideology import attach

    x = _src(args.src)
    pair = attach(x, args.denoms, args.prec, args.count)
    return {"command": "attach", "source": x.label, "pair": pair, "ties": list(pair.ties)}


def cmd_compose(args) -> dict:
    from .ideology import attach, ideo_compose

    x, y = _src(args.x), _src(args.y)
    pA = attach(x, args.denoms, args.prec, args.count)
    pB = attach(y, args.denoms_y or args.denoms, args.prec, args.count)
    wA = _window(args.mu, args.nu)
    comp = ideo_compose(pA, pB, wA, wA.swapped(), args.depth, args.prec, bound=args.bound)
    return {"command": "compose", "product": comp.product, "sum": comp.sum,
            "difference": comp.difference, "verdicts": [comp.verdict]}


def cmd_spectrum(args) -> dict:
    from .ideology import best_interval

    x = _src(args.src)
    sel = "all" if args.subseq == "all" else [int(t) for t in args.subseq.split(",") if t.strip()]
    b = best_interval(x, sel, args.depth)
    n = len(b.indices)
    return {"command": "spectrum", "source": x.label, "indices": list(b.indices),
            "muBreve": _class_terms(b.mu, n), "nuBreve": _class_terms(b.nu, n), "verdicts": [b.infinite_pq]}


def cmd_flat(args) -> dict:
    from .ideology import composability_label, flat_composable

    v = flat_composable(_src(args.x), _src(args.y), args.depth)
    return {"command": "flat", "label": composability_label(v), "verdicts": [v]}


def cmd_sym(args) -> dict:
    from .symmetric import golden_symmetric_verdict, symmetric_verdict, theta_norm
    from .ideology import attach

    if args.seq:
        seq = [int(t) for t in args.seq.split(",") if t.strip()]
        return {"command": "sym", "verdicts": [golden_symmetric_verdict(seq, args.depth, args.bound)]}
    if not args.src:
        raise MalformedSpec("sym needs --src or --seq")
    x = _src(args.src)
    pair = attach(x, args.denoms, 64, args.count)
    return {"command": "sym", "source": x.label, "thetaNorms": theta_norm(pair),
            "verdicts": [symmetric_verdict(pair, args.depth, args.bound)]}


def cmd_zeck(args) -> dict:
    from .symmetric import golden_error_test, zeckendorf

    z = zeckendorf(args.N)
    out = {"command": "zeck", "N": args.N, "indices": list(z.indices), "zdeg": z.zdeg}
    if args.n is not None:
        ok, cert = golden_error_test(args.N, args.n)
        if cert.criterion != cert.direct:
            raise Violation("Zeckendorf criterion disagrees with direct evaluation", {"N": args.N, "n": args.n})
        out["n"] = args.n
        out["errorBelow"] = ok
    return out


def cmd_littlewood(args) -> dict:
    from .symmetric import TRACE_COLUMNS, littlewood_scan, trace_rows

    res = littlewood_scan(_src(args.x), _src(args.y), args.limit, partitions=args.partitions)
    return {"command": "littlewood", "argmin": res.argmin, "value": res.value,
            "columns": TRACE_COLUMNS, "rows": trace_rows(res)}


def cmd_respoly(args) -> dict:
    from . import respoly as rp
    from .poly import RatMap

    op = args.op
    if op in ("prod", "sum", "diff"):
        f, g = _poly(args.f), _poly(args.g)
        r = rp.res_prod(f, g) if op == "prod" else rp.res_combine(f, g, op)
        return {"command": f"respoly {op}", "poly": str(r)}
    if op == "square":
        return {"command": "respoly square", "poly": str(rp.square_act(_poly(args.f), RatMap.parse(args.g)))}
    if op in ("height", "mahler"):
        f = _poly(args.f)
        theta = _src(args.src) if args.src else None
        hm = rp.height_mahler(f, 96, theta)
        out = {"command": f"respoly {op}", "poly": str(f), "height": hm.h, "mahler": hm.m}
        if theta is not None:
            out["mTheta"], out["zTheta"] = hm.m_theta, hm.z_theta
        return out
    if op == "bestpoly":
        x = _src(args.src)
        s = rp.best_poly_scan(x, args.d, args.H, args.exclude_vanishing)
        return {"command": "respoly bestpoly", "poly": str(s.poly), "value": s.value,
                "exponent": s.exponent, "exactHit": s.exact_hit}
    if op == "wirsing":
        f, x = _poly(args.f), _src(args.src)
        w = rp.wirsing_check(f, x, Fraction(args.rho))
        out = {"command": "respoly wirsing", "lower": w.lower, "z": w.z, "upper": w.upper, "ok": w.ok}
        if not w.ok:
            raise Violation("Wirsing sandwich violated", out)
        return out
    raise MalformedSpec(f"unknown respoly operation {op!r}")


def cmd_mat(args) -> dict:
    from . import matdio as md

    op = args.op
    if op == "kron":
        A, B = md.RealMat.parse(args.A), md.RealMat.parse(args.B)
        K = md.kron(A, B, args.mode)
        rows = [[e.enclose(args.prec) if e.exact() is None else e.exact() for e in row] for row in K.rows]
        return {"command": "mat kron", "mode": args.mode, "matrix": rows}
    if op == "attach":
        T = md.RealMat.parse(args.theta)
        p = md.vec_attach(T, md.parse_int_vectors(args.denoms), args.prec)
        return {"command": "mat attach", "pair": p, "house": [md.house(e) for e in p.errors]}
    if op == "compose":
        A, B = md.RealMat.parse(args.A), md.RealMat.parse(args.B)
        pA = md.vec_attach(A, md.parse_int_vectors(args.denoms), args.prec)
        pB = md.vec_attach(B, md.parse_int_vectors(args.denoms_b or args.denoms), args.prec)
        c = md.mat_ideo_compose(pA, pB, depth=args.depth, precision=args.prec, bound=args.bound)
        return {"command": "mat compose", "product": c.product, "sum": c.sum, "difference": c.difference,
                "verdicts": [c.verdict]}
    if op == "glact":
        T = md.RealMat.parse(args.theta)
        M = md.BlockMat(md.parse_int_vectors(args.M), T.shape[0])
        pair = md.vec_attach(T, md.parse_int_vectors(args.denoms), args.prec) if args.denoms else None
        new, p2 = md.gl_equiv_act(M, T, pair, args.prec)
        return {"command": "mat glact", "theta": [[e.enclose(args.prec) for e in row] for row in new.rows],
                "pair": p2}
    raise MalformedSpec(f"unknown mat operation {op!r}")


def cmd_field(args) -> dict:
    from . import kfield as kf
    from .matdio import split_top

    K = kf.QuadField.parse(args.field)
    op = args.op

    def build():
        if args.theta:
            return kf.pv_pair(K.element(args.theta), args.count, args.prec)
        if not args.z:
            raise MalformedSpec("give --theta for a PV pair or --z with --denoms")
        parts = split_top(args.z, ",")
        z = kf.KPoint.diagonal(_src(parts[0]), K) if len(parts) == 1 else kf.KPoint(_src(parts[0]), _src(parts[1]))
        ds = [K.element(t) for t in split_top(args.denoms or "", ";") if t.strip()]
        return kf.o_attach(z, K, ds, args.prec)

    pair = build()
    out = {"command": f"field {op}", "field": repr(K)}
    if op in ("pv", "attach"):
        out["pair"] = pair
        if op == "pv":
            out["verdicts"] = [kf.o_membership(pair, kf.pv_flat_window(K.element(args.theta)), args.depth, args.bound)]
        return out
    if op in ("trace", "norm"):
        w = kf.pv_flat_window(K.element(args.theta)) if args.theta and op == "trace" else None
        push = kf.push_trace_norm(pair, op, w, args.depth, args.prec, args.bound)
        out.update({"pair": push.pair, "flags": list(push.flags), "skipped": list(push.skipped)})
        if push.verdict is not None:
            out["verdicts"] = [push.verdict]
        return out
    if op == "compose":
        if not args.theta:
            raise MalformedSpec("field compose uses the PV pair of --theta with itself")
        w = kf.pv_flat_window(K.element(args.theta))
        c = kf.o_compose(pair, pair, w, w.swapped(), args.depth, args.prec, args.bound)
        return {**out, "product": c.product, "sum": c.sum, "difference": c.difference, "verdicts": [c.verdict]}
    raise MalformedSpec(f"unknown field operation {op!r}")


def cmd_selftest(args) -> dict:
    """Quick checks of worked examples; any miss is reported as a violation."""
    from . import kfield as kf
    from . import matdio as md
    from .reals import convergents
    from .respoly import res_prod
    from .symmetric import zeckendorf

    rng = random.Random(args.seed)
    checks = []
    cs = convergents(_src("surd:√2"), 5)
    checks.append(("cf-sqrt2", (cs[-1].p, cs[-1].q) == (41, 29)))
    checks.append(("res-prod", str(res_prod(_poly("x^2-2"), _poly("x^2-3"))) == "x^4-12x^2+36"))
    checks.append(("zeck-100", zeckendorf(100).indices == (4, 6, 11)))
    checks.append(("house", md.house((3, -7, 2)) == 7))
    K = kf.QuadField(5)
    p = kf.pv_pair(K.embed(0, 1), 12)
    checks.append(("pv-lucas", [a.trace() for a in p.denoms[:5]] == [1, 3, 4, 7, 11]))
    N = rng.randrange(1, 10 ** 6)
    z = zeckendorf(N)
    from .symmetric import fib

    checks.append(("zeck-random", sum(fib(i) for i in z.indices) == N))
    failed = [name for name, ok in checks if not ok]
    out = {"command": "selftest", "checks": {name: ok for name, ok in checks}}
    if failed:
        raise Violation("selftest failed", {"failed": failed})
    return out


# ---------------------------------------------------------------------------
# argument parsing


def _global_flags() -> argparse.ArgumentParser:
    g = argparse.ArgumentParser(add_help=False)
    g.add_argument("--prec", type=int, default=config.DEFAULT_PREC, help="precision in bits")
    g.add_argument("--depth", type=int, default=config.DEFAULT_DEPTH, help="verdict window depth")
    g.add_argument("--bound", type=Fraction, default=Fraction(config.EQUIV_BOUND), help="equivalence bound")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--format", choices=("json", "csv", "text"), default="json")
    return g


def build_parser() -> argparse.ArgumentParser:
    g = _global_flags()
    p = argparse.ArgumentParser(prog="ideoarith", description="Certified diophantine approximation arithmetic.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("cf", parents=[g], help="convergent table")
    s.add_argument("--src", required=True)
    s.add_argument("--count", type=int, default=10)
    s.set_defaults(fn=cmd_cf)

    s = sub.add_parser("attach", parents=[g], help="attach numerators and errors to denominators")
    s.add_argument("--src", required=True)
    s.add_argument("--denoms", default="best")
    s.add_argument("--count", type=int, default=16)
    s.set_defaults(fn=cmd_attach)

    s = sub.add_parser("compose", parents=[g], help="ideological product, sum and difference")
    s.add_argument("--x", required=True)
    s.add_argument("--y", required=True)
    s.add_argument("--denoms", default="best")
    s.add_argument("--denoms-y", dest="denoms_y")
    s.add_argument("--count", type=int, default=16)
    s.add_argument("--mu", required=True, help="growth class of the first pair")
    s.add_argument("--nu", required=True, help="decay class of the first pair")
    s.set_defaults(fn=cmd_compose)

    s = sub.add_parser("spectrum", parents=[g], help="best-interval classes along a selection")
    s.add_argument("--src", required=True)
    s.add_argument("--subseq", default="all")
    s.set_defaults(fn=cmd_spectrum)

    s = sub.add_parser("flat", parents=[g], help="flat composability of two reals")
    s.add_argument("--x", required=True)
    s.add_argument("--y", required=True)
    s.set_defaults(fn=cmd_flat)

    s = sub.add_parser("sym", parents=[g], help="symmetric approximation verdicts")
    s.add_argument("--src")
    s.add_argument("--seq", help="comma-separated integers for the golden-ratio test")
    s.add_argument("--denoms", default="fib")
    s.add_argument("--count", type=int, default=40)
    s.set_defaults(fn=cmd_sym)

    s = sub.add_parser("zeck", parents=[g], help="Zeckendorf representation and error criterion")
    s.add_argument("--N", type=int, required=True)
    s.add_argument("--n", type=int)
    s.set_defaults(fn=cmd_zeck)

    s = sub.add_parser("littlewood", parents=[g], help="minimum of n‖nx‖‖ny‖")
    s.add_argument("--x", required=True)
    s.add_argument("--y", required=True)
    s.add_argument("--limit", type=int, required=True)
    s.add_argument("--partitions", type=int, default=1)
    s.set_defaults(fn=cmd_littlewood)

    s = sub.add_parser("respoly", parents=[g], help="resultant arithmetic and Mahler measures")
    s.add_argument("op", choices=("prod", "sum", "diff", "square", "height", "mahler", "bestpoly", "wirsing"))
    s.add_argument("f", nargs="?")
    s.add_argument("g", nargs="?", help="second polynomial, or the rational map for square")
    s.add_argument("--src")
    s.add_argument("--d", type=int, default=1)
    s.add_argument("--H", type=int, default=7)
    s.add_argument("--exclude-vanishing", action="store_true")
    s.add_argument("--rho", default="1")
    s.set_defaults(fn=cmd_respoly)

    s = sub.add_parser("mat", parents=[g], help="matrix approximation")
    s.add_argument("op", choices=("kron", "attach", "compose", "glact"))
    s.add_argument("--A")
    s.add_argument("--B")
    s.add_argument("--theta")
    s.add_argument("--M")
    s.add_argument("--mode", choices=("prod", "sum", "diff"), default="prod")
    s.add_argument("--denoms")
    s.add_argument("--denoms-b", dest="denoms_b")
    s.set_defaults(fn=cmd_mat)

    s = sub.add_parser("field", parents=[g], help="real quadratic field approximation")
    s.add_argument("op", choices=("pv", "attach", "trace", "norm", "compose"))
    s.add_argument("--field", required=True, help="qfield:<D>")
    s.add_argument("--theta", help="PV element <a>+<b>w")
    s.add_argument("--z", help="target: one source (diagonal) or two comma-separated")
    s.add_argument("--denoms", help="';'-separated elements <a>+<b>w")
    s.add_argument("--count", type=int, default=40)
    s.set_defaults(fn=cmd_field)

    s = sub.add_parser("selftest", parents=[g], help="run the worked examples")
    s.set_defaults(fn=cmd_selftest)
    return p


def _check_config(args):
    if args.prec < 1 or args.prec > config.PREC_CAP:
        raise MalformedSpec(f"--prec must lie in [1, {config.PREC_CAP}]")
    if args.depth < 8:
        raise MalformedSpec("--depth must be at least 8")
    if args.bound <= 1:
        raise MalformedSpec("--bound must exceed 1")


def run_command(argv: Optional[List[str]] = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        _check_config(args)
        result = args.fn(args)
    except Violation as exc:
        out.write(emit_report({"command": args.command, "violation": str(exc), "witness": exc.witness},
                              "json"))
        return EXIT_VIOLATED
    except IdentityViolated as exc:
        out.write(emit_report({"command": args.command, "violation": str(exc)}, "json"))
        return EXIT_VIOLATED
    except (MalformedSpec, ValueError) as exc:
        err.write(f"ideoarith: {exc}\n")
        return EXIT_USAGE
    except MembershipFailed as exc:
        err.write(f"ideoarith: pair {exc.side} is not in its window\n")
        return EXIT_FAIL
    except IdeoError as exc:
        err.write(f"ideoarith: {type(exc).__name__}: {exc}\n")
        return EXIT_FAIL
    out.write(emit_report(result, args.format))
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    return run_command(argv)


if __name__ == "__main__":
    sys.exit(main())
