"""Command-line front end: ``theta-recur <subcommand> [options]``.

Exit status: 0 success, 1 audit failure, 2 precision exhaustion, 3 usage
error.  Every JSON document carries the schema tag and the full run config.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from datetime import datetime, timezone
from fractions import Fraction

from . import __version__
from .audit import DEFAULT_EPS, audit_all, hausdorff_measure
from .balls import PrecisionPolicy, fmt
from .cf import classify_angle, convergents, format_angle, parse_angle, qtable
from .errors import PrecisionExhausted, ThetaRecurError
from .model_map import construct_model
from .ostrowski import decode_int, decode_real, encode_int, encode_real, increment, parse_word
from .quadratic import closest_returns, find_c, iterate_orbit, solve, solve_scaling
from .renorm import RenormState, recode_word, sturmian_word, trajectory
from .symbolic import (build_hierarchy, compare_points, kneading_sequence, neg_count, sign_table,
                       verify_recurrence)

SCHEMA = "theta-recur/v1"
EXIT_OK, EXIT_AUDIT, EXIT_PRECISION, EXIT_USAGE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _sign_char(s):
    return "+" if s > 0 else "-" if s < 0 else "C"


# -- subcommands -----------------------------------------------------------
# each returns (result dict, exit status, optional csv rows)

def cmd_convergents(args, cf):
    cv = convergents(cf, args.depth)
    res = {"angle": format_angle(cf), "base": cv.base, "q": list(cv.q), "p": list(cv.p)}
    if args.classify:
        cls = classify_angle(cf, Fraction(args.tau), args.depth)
        res["class"] = {"admissible": cls.admissible, "bounded": cls.bounded,
                        "records": cls.records, "gap_condition": cls.gap_condition}
    return res, EXIT_OK, None


def cmd_ostrowski(args, cf):
    res = {"angle": format_angle(cf)}
    if args.int is not None:
        w = encode_int(args.int, cf, args.appendix)
        res.update(k=args.int, word=str(w), base=w.base, support=[list(t) for t in w.support()],
                   successor=str(increment(w)))
    elif args.word is not None:
        w = parse_word(args.word, cf, base=None if args.appendix is None else (0 if args.appendix else 1))
        res.update(word=str(w), k=decode_int(w))
    elif args.real is not None:
        from flint import arb, ctx
        with ctx.workprec(args.bits):
            x = arb(args.real)
            w = encode_real(x, cf, args.depth, args.appendix, args.bits)
            res.update(x=args.real, word=str(w), base=w.base,
                       value=fmt(decode_real(w, args.depth, args.bits), 30))
    else:
        raise UsageError("give one of --int, --word, --real")
    return res, EXIT_OK, None


def cmd_signs(args, cf):
    t = sign_table(cf)
    t.ensure(args.count + 1)
    signs = "".join(_sign_char(t.sign(k)) for k in range(1, args.count + 1))
    return {"angle": format_angle(cf), "count": args.count, "signs": signs,
            "neg": neg_count(args.count + 1, cf)}, EXIT_OK, None


def cmd_kneading(args, cf):
    ks = kneading_sequence(cf, args.length)
    return {"angle": format_angle(cf), "length": args.length, "kneading": str(ks),
            "eventual_period": ks.eventual_period(args.max_period)}, EXIT_OK, None


def _index_or_word(text, cf):
    text = text.strip()
    return parse_word(text, cf) if text.startswith("[") else int(text)


def cmd_order(args, cf):
    res = {"angle": format_angle(cf)}
    if args.level is not None:
        h = build_hierarchy(cf, args.level)
        res["hierarchy"] = h.to_json()
        return res, EXIT_OK, None
    if args.u is None or args.v is None:
        raise UsageError("give --u and --v, or --level")
    res.update(u=args.u, v=args.v, cmp=compare_points(_index_or_word(args.u, cf), _index_or_word(args.v, cf), cf))
    return res, EXIT_OK, None


def cmd_model(args, cf):
    mm = construct_model(cf, args.depth, args.policy)
    v = verify_recurrence(mm, cf, args.depth)
    res = mm.to_json()
    res["checks"] = {"verify_recurrence": v.ok, "monotone": mm.monotone(), "gaps_capped": mm.gaps_capped()}
    ok = v.ok and mm.monotone() and mm.gaps_capped()
    return res, EXIT_OK if ok else EXIT_AUDIT, None


def cmd_find_c(args, cf):
    enc = find_c(cf, args.depth, Fraction(args.width), _policy(args))
    q_N = qtable(cf).q(args.depth)
    orb = iterate_orbit(enc.mid, q_N + 1, enc.bits)
    res = enc.to_json()
    res["returns"] = closest_returns(orb, q_N)
    res["verify_recurrence"] = verify_recurrence(orb, cf, args.depth).ok
    return res, EXIT_OK, None


def cmd_orbit(args, _cf):
    orb = iterate_orbit(Fraction(args.c), args.steps, args.bits)
    rows = []
    for k, x in enumerate(orb):
        sg = _safe_sign(orb, k)
        rows.append({"k": k, "x": fmt(x), "sign": "?" if sg is None else _sign_char(sg)})
    res = {"c": args.c, "steps": args.steps, "bits": args.bits, "first_indeterminate": orb.first_indeterminate,
           "points": rows}
    if args.returns:
        res["returns"] = closest_returns(orb, orb.certified_through())
    return res, EXIT_OK, rows


def _safe_sign(orb, k):
    if k == 0:
        return 0
    try:
        return orb.sign(k)
    except PrecisionExhausted:
        return None


def cmd_scaling(args, cf):
    sd = solve_scaling(cf, args.nmax, _policy(args))
    return sd.to_json(), EXIT_OK, list(sd.rows())


def cmd_audit(args, cf):
    sd = solve_scaling(cf, args.nmax, _policy(args))
    res = audit_all(sd, Fraction(args.C))
    return res, EXIT_OK if res["verdict"] == "pass" else EXIT_AUDIT, None


def cmd_hausdorff(args, cf):
    eps = tuple(float(e) for e in args.eps.split(",")) if args.eps else DEFAULT_EPS
    qt = qtable(cf)
    sol = solve(cf, qt.q(args.nmax + 2) + 1, _policy(args))
    tab = hausdorff_measure(sol.orbit, cf, range(args.nmin, args.nmax + 1), eps)
    rows = [{"n": n, **{f"S({e})": fmt(tab.S[(e, n)]) for e in eps}} for n in tab.levels]
    return tab.to_json(), EXIT_OK, rows


def cmd_renorm(args, cf):
    st = RenormState.initial(cf, args.s)
    return {"trajectory": [t.to_json(args.count) for t in trajectory(st, args.steps)]}, EXIT_OK, None


def cmd_sturmian(args, cf):
    w = sturmian_word(cf, args.length, args.bits)
    res = {"angle": format_angle(cf), "length": len(w), "word": str(w), "isolated": w.isolated}
    if args.recode:
        res["recoded"] = str(recode_word(w))
    return res, EXIT_OK, None


def _policy(args):
    return PrecisionPolicy(args.bits, args.cap)


# -- plumbing --------------------------------------------------------------

COMMANDS = {
    "convergents": cmd_convergents, "ostrowski": cmd_ostrowski, "signs": cmd_signs,
    "kneading": cmd_kneading, "order": cmd_order, "model": cmd_model, "find-c": cmd_find_c,
    "orbit": cmd_orbit, "scaling": cmd_scaling, "audit": cmd_audit, "hausdorff": cmd_hausdorff,
    "renorm": cmd_renorm, "sturmian": cmd_sturmian,
}


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--angle", help='continued fraction, e.g. "1,1,1,3,2,(1)*"')
    common.add_argument("--bits", type=int, default=128, help="starting precision in bits")
    common.add_argument("--cap", type=int, default=8192, help="precision cap in bits")
    common.add_argument("--format", choices=["json", "csv", "text"], default="json")
    common.add_argument("--output", "-o", help="write here instead of stdout")
    common.add_argument("--no-timestamp", action="store_true", help="omit the timestamp field")

    p = _Parser(prog="theta-recur", description="theta-recurrent unimodal maps toolkit")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    s = sub.add_parser("convergents", parents=[common])
    s.add_argument("--depth", type=int, required=True)
    s.add_argument("--classify", action="store_true")
    s.add_argument("--tau", default="1")
    s = sub.add_parser("ostrowski", parents=[common])
    s.add_argument("--int", type=int)
    s.add_argument("--word")
    s.add_argument("--real")
    s.add_argument("--depth", type=int, default=20)
    s.add_argument("--appendix", action="store_true", default=None,
                   help="use digit position 0 even when a_1 = 1")
    s = sub.add_parser("signs", parents=[common])
    s.add_argument("--count", type=int, default=100)
    s = sub.add_parser("kneading", parents=[common])
    s.add_argument("--length", type=int, default=200)
    s.add_argument("--max-period", type=int, default=50)
    s = sub.add_parser("order", parents=[common])
    s.add_argument("--u")
    s.add_argument("--v")
    s.add_argument("--level", type=int)
    s = sub.add_parser("model", parents=[common])
    s.add_argument("--depth", type=int, required=True)
    s.add_argument("--policy", default="midpoint")
    s = sub.add_parser("find-c", parents=[common])
    s.add_argument("--depth", type=int, required=True)
    s.add_argument("--width", default="1e-30")
    s = sub.add_parser("orbit", parents=[common])
    s.add_argument("--c", required=True, help="exact decimal or p/q parameter")
    s.add_argument("--steps", type=int, default=20)
    s.add_argument("--returns", action="store_true")
    for name in ("scaling", "audit", "hausdorff"):
        s = sub.add_parser(name, parents=[common])
        s.add_argument("--nmax", type=int, default=10)
        if name == "audit":
            s.add_argument("--C", default="5")
        if name == "hausdorff":
            s.add_argument("--nmin", type=int, default=2)
            s.add_argument("--eps", help="comma separated grid, default 1,0.5,0.2,0.1,0.05")
    s = sub.add_parser("renorm", parents=[common])
    s.add_argument("--steps", type=int, default=6)
    s.add_argument("--s", default="+")
    s.add_argument("--count", type=int, default=5, help="return times listed per state")
    s = sub.add_parser("sturmian", parents=[common])
    s.add_argument("--length", type=int, default=100)
    s.add_argument("--recode", action="store_true")
    return p


def _config(args):
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("output", "no_timestamp", "format")}


def _render(args, res, rows) -> str:
    if args.format == "csv":
        if rows is None:
            raise UsageError(f"{args.command} has no CSV form")
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
        return buf.getvalue()
    doc = {"schema": SCHEMA, "command": args.command, "config": _config(args)}
    if not args.no_timestamp:
        doc["timestamp"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
    doc["result"] = res
    if args.format == "text":
        return "\n".join(f"{k}: {json.dumps(v)}" for k, v in doc.items()) + "\n"
    return json.dumps(doc, indent=2) + "\n"


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.command != "orbit" and not args.angle:
            raise UsageError("--angle is required")
        cf = parse_angle(args.angle) if args.angle else None
        res, status, rows = COMMANDS[args.command](args, cf)
        text = _render(args, res, rows)
    except UsageError as exc:
        print(f"error: usage: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PrecisionExhausted as exc:
        print(exc.line(), file=sys.stderr)
        return EXIT_PRECISION
    except ThetaRecurError as exc:
        print(exc.line(), file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: usage: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
