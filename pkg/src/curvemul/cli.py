"""Command-line frontend.

Subcommands wire the library into reproducible workflows with
machine-readable output:

    build-multiplier   construct + verify a multiplication algorithm
    construct-divisor  solve the vanishing constraints for a divisor D
    verify             re-check an algorithm file
    code               build a Goppa evaluation code and test intersection
    bounds             exact bound tables (stv, rq, kappa, mu, ballet, ...)
    psi                Dedekind psi values and psi-ceilings
    prime-eps          exact prime-gap ratio over a sieve window

Exit codes: 0 success, 2 infeasible hypothesis, 3 verification failure,
4 input error.  JSON is the stable interchange format; CSV only for
tables; text output is human oriented.  Given the same inputs and seed,
every subcommand writes byte-identical artifacts.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

from . import bounds as bnd
from . import chudnovsky as ch
from . import codes as cds
from .curves import (
    Curve, Divisor, curve_from_json, divisor_from_json, divisor_to_json,
    point_from_json, point_to_json, dim_l,
)
from .ordinary import (
    Constraint, InfeasibleWindowError, PoolTooSmallError, SignedConstraint,
    construct_ordinary_divisor, reduce_signed_constraints,
)

EXIT_OK = 0
EXIT_INFEASIBLE = 2
EXIT_VERIFY_FAILED = 3
EXIT_INPUT = 4

OUT_DIR_ENV = "CURVEMUL_OUT"


def _frac(s: str) -> Fraction:
    return Fraction(s)


def _fmt(v):
    if isinstance(v, Fraction):
        return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
    return str(v)


def _resolve_out(path):
    if path is None:
        return None
    base = os.environ.get(OUT_DIR_ENV)
    if base and not os.path.isabs(path):
        return os.path.join(base, path)
    return path


def _emit(payload: dict, args, text_lines=None):
    fmt = getattr(args, "format", "json")
    if fmt == "text" and text_lines is not None:
        body = "\n".join(text_lines) + "\n"
    elif fmt == "csv" and "csv" in payload:
        body = payload["csv"]
    else:
        clean = {k: v for k, v in payload.items() if k != "csv"}
        body = json.dumps(clean, indent=2) + "\n"
    out = _resolve_out(getattr(args, "out", None))
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(body)
    else:
        sys.stdout.write(body)


def _load_json_arg(path: str):
    if path == "-":
        return json.load(sys.stdin)
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


# -- build-multiplier ---------------------------------------------------------


def cmd_build_multiplier(args) -> int:
    alg = ch.auto_pipeline(args.q, args.k)
    report = ch.verify_algorithm(alg, mode=args.verify, samples=args.samples,
                                 seed=args.seed, jobs=args.jobs)
    doc = ch.algorithm_to_json(alg)
    out = _resolve_out(args.out)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(json.dumps(doc, indent=2) + "\n")
    payload = {
        "n": alg.n,
        "q": alg.q,
        "k": alg.k,
        "lower_bound": 2 * alg.k - 1,
        "verification": report,
        "file": out,
    }
    lines = [
        f"length n = {alg.n} (lower bound 2k-1 = {2 * alg.k - 1})",
        f"verification: {'PASS' if report['ok'] else 'FAIL'} "
        f"({report['method']}, {report['pairs_checked']} pairs checked, "
        f"{report['pairs_certified']} certified)",
    ]
    if out:
        lines.append(f"algorithm written to {out}")
    else:
        payload["algorithm"] = doc
    # --out holds the algorithm artifact; the report always goes to stdout
    report_args = argparse.Namespace(format=args.format, out=None)
    _emit(payload, report_args, lines)
    return EXIT_OK if report["ok"] else EXIT_VERIFY_FAILED


# -- construct-divisor --------------------------------------------------------


def cmd_construct_divisor(args) -> int:
    cfg = _load_json_arg(args.config)
    curve = curve_from_json(cfg["curve"])
    signed = [SignedConstraint(int(c["k"]), divisor_from_json(curve, c["G"]))
              for c in cfg["constraints"]]
    constraints, d_minus, d_plus = reduce_signed_constraints(curve, signed)
    d = cfg.get("d")
    if d is None:
        if d_plus is None:
            raise ValueError("open-ended window: an explicit d is required")
        d = d_plus
    if (d_minus is not None and d < d_minus) or (d_plus is not None and d > d_plus):
        raise InfeasibleWindowError(
            f"d = {d} outside the admissible window [{d_minus}, {d_plus}]")
    pool = ([point_from_json(curve, p) for p in cfg["pool"]]
            if "pool" in cfg else curve.rational_points())
    if "D0" in cfg:
        D0 = divisor_from_json(curve, cfg["D0"])
    else:
        d0 = min((c.t - 1) // c.s for c in constraints)
        d0 = min(d0, d)
        D0 = Divisor.of_point(pool[0], d0)
    D = construct_ordinary_divisor(curve, constraints, d, D0, pool)
    l_values = [dim_l(curve, sc.k * D - sc.G) for sc in signed]
    payload = {
        "window": {"d_minus": d_minus, "d_plus": d_plus},
        "d": d,
        "D": divisor_to_json(D),
        "l_values": l_values,
    }
    lines = [f"window: [{d_minus}, {d_plus}]  chosen d = {d}",
             f"D = {D!r}",
             f"per-constraint l values: {l_values}"]
    _emit(payload, args, lines)
    if any(l_values):
        return EXIT_VERIFY_FAILED
    return EXIT_OK


# -- verify -------------------------------------------------------------------


def cmd_verify(args) -> int:
    doc = _load_json_arg(args.file)
    alg = ch.algorithm_from_json(doc)
    report = ch.verify_algorithm(alg, mode=args.mode, samples=args.samples,
                                 seed=args.seed, jobs=args.jobs)
    lines = [f"q={alg.q} k={alg.k} n={alg.n}: "
             f"{'PASS' if report['ok'] else 'FAIL'} ({report['method']})"]
    _emit({"n": alg.n, "q": alg.q, "k": alg.k, "verification": report}, args, lines)
    return EXIT_OK if report["ok"] else EXIT_VERIFY_FAILED


# -- code ---------------------------------------------------------------------


def cmd_code(args) -> int:
    cfg = _load_json_arg(args.config)
    curve = curve_from_json(cfg["curve"])
    D = divisor_from_json(curve, cfg["D"])
    if isinstance(cfg["G"], dict):
        n = int(cfg["G"]["count"])
        pts = curve.rational_points()
        if n > len(pts):
            raise ValueError(f"curve has only {len(pts)} rational points")
        G_points = pts[:n]
    else:
        G_points = [point_from_json(curve, p) for p in cfg["G"]]
    code = cds.goppa_code(curve, G_points, D)
    xing = cds.xing_criterion(curve, G_points, D)
    payload = {"code": cds.code_to_json(code), "xing_criterion": xing}
    lines = [f"[{code.n},{code.k}] code over GF({code.field.order}); "
             f"intersecting criterion: {'holds' if xing else 'fails'}"]
    if args.check != "none":
        sample = 0 if args.check == "exhaustive" else args.samples
        rep = cds.is_intersecting_bruteforce(code, sample_pairs=sample, seed=args.seed)
        payload["intersecting"] = {
            "intersecting": rep.intersecting,
            "pairs_checked": rep.pairs_checked,
            "exhaustive": rep.exhaustive,
        }
        lines.append(f"intersecting check: {'PASS' if rep.intersecting else 'FAIL'} "
                     f"({rep.pairs_checked} pairs, exhaustive={rep.exhaustive})")
    if args.format == "csv":
        rows = ["\t".join(str(c.idx) for c in row).replace("\t", ",")
                for row in code.generator]
        payload["csv"] = "\n".join(rows) + "\n"
    _emit(payload, args, lines)
    if args.check != "none" and not payload["intersecting"]["intersecting"]:
        return EXIT_VERIFY_FAILED
    return EXIT_OK


# -- bounds -------------------------------------------------------------------


def _emit_report(rep: bnd.BoundReport, args, extra_lines=()):
    lines = [f"{rep.name}: value = {_fmt(rep.value) if rep.value is not None else 'inapplicable'}"]
    for k, v in rep.hypotheses.items():
        lines.append(f"  hypothesis {k}: {'ok' if v else 'FAILS'}")
    for k, v in rep.details.items():
        lines.append(f"  {k} = {_fmt(v) if isinstance(v, (Fraction, int)) else v}")
    lines.extend(extra_lines)
    _emit(rep.to_json(), args, lines)
    return EXIT_OK if rep.applicable else EXIT_INFEASIBLE


def cmd_bounds_stv(args) -> int:
    return _emit_report(bnd.stv_bounds(args.q, _frac(args.A),
                                       _frac(args.Aprime) if args.Aprime else None), args)


def cmd_bounds_rq(args) -> int:
    return _emit_report(bnd.rq_bounds(_frac(args.nu), args.q), args)


def cmd_bounds_kappa(args) -> int:
    val = bnd.kappa_window(_frac(args.nu), args.q)
    rep = bnd.BoundReport("kappa-window", val, {"nu_gt_2": True},
                          {"nu": _frac(args.nu), "q": args.q})
    return _emit_report(rep, args)


def cmd_bounds_mu(args) -> int:
    rows = []
    if args.rows:
        for part in args.rows.split(","):
            g, n1 = part.split(":")
            rows.append((int(g), int(n1)))
    return _emit_report(bnd.mu_upper(args.q, args.k, rows), args)


def cmd_bounds_ballet(args) -> int:
    return _emit_report(bnd.ballet_bound(args.p, args.k), args)


def cmd_bounds_co(args) -> int:
    cfg = _load_json_arg(args.config)
    mu_table = {int(k): int(v) for k, v in cfg.get("mu", {}).items()}
    mhat = {}
    for key, v in cfg.get("mhat", {}).items():
        d, u = key.split(",")
        mhat[(int(d), int(u))] = int(v)
    rep = bnd.co_bound([(int(d), int(u)) for d, u in cfg["points"]],
                       mu_table, mhat, int(cfg["n1"]), int(cfg["g"]),
                       int(cfg["k"]), q=cfg.get("q"),
                       has_degree_k_point=cfg.get("has_degree_k_point"))
    return _emit_report(rep, args)


def cmd_bounds_n1_3n2(args) -> int:
    return _emit_report(bnd.n1_3n2_bound(args.q, args.k, args.g, args.n1, args.n2), args)


def cmd_bounds_dv(args) -> int:
    return _emit_report(bnd.dv_ratio_report(args.q, args.g, args.n1, args.n2), args)


def cmd_bounds_genus_x0(args) -> int:
    if args.max_N:
        rows = ["N,psi,genus,nu_inf,nu3,nu2"]
        table = []
        for N in range(1, args.max_N + 1):
            g, cap, ni, n3, n2 = bnd.genus_x0(N)
            rows.append(f"{N},{bnd.psi(N)},{g},{ni},{n3},{n2}")
            table.append({"N": N, "psi": bnd.psi(N), "genus": g,
                          "nu_inf": ni, "nu3": n3, "nu2": n2})
        _emit({"table": table, "csv": "\n".join(rows) + "\n"}, args, rows)
        return EXIT_OK
    g, cap, ni, n3, n2 = bnd.genus_x0(args.N)
    rep = bnd.BoundReport("modular-genus", g, {"within_psi_cap": g <= cap},
                          {"psi_over_12": cap, "nu_inf": ni, "nu3": n3, "nu2": n2})
    return _emit_report(rep, args)


def cmd_bounds_x0_points(args) -> int:
    val = bnd.x0_point_lower_bound(args.p, args.N)
    rep = bnd.BoundReport("x0-point-floor", val, {"coprime": True},
                          {"p": args.p, "N": args.N})
    return _emit_report(rep, args)


# -- psi / prime-eps ----------------------------------------------------------


def cmd_psi(args) -> int:
    if args.x is not None:
        if args.p is None:
            raise ValueError("--x needs --p")
        value, witness = bnd.ceil_psi(_frac(args.x), args.p)
        payload = {"ceiling": value, "witness_N": witness,
                   "x": str(_frac(args.x)), "p": args.p}
        _emit(payload, args, [f"ceiling = {value} attained at N = {witness}"])
        return EXIT_OK
    if args.n is None:
        raise ValueError("pass --n N or --x X --p P")
    v = bnd.psi(args.n)
    _emit({"N": args.n, "psi": v}, args, [f"psi({args.n}) = {v}"])
    return EXIT_OK


def cmd_prime_eps(args) -> int:
    rep = bnd.prime_eps(getattr(args, "from"), args.limit)
    lines = [f"eps = {_fmt(rep.value)} over [{getattr(args, 'from')}, {args.limit}]",
             "values beyond the limit rely on external estimates"]
    _emit(rep.to_json(), args, lines)
    return EXIT_OK


# -- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="curvemul", description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, fmt_default="text"):
        p.add_argument("--format", choices=("json", "csv", "text"), default=fmt_default)
        p.add_argument("--out", default=None, help="output file (default stdout); "
                       f"relative paths resolve against ${OUT_DIR_ENV} when set")

    p = sub.add_parser("build-multiplier", help="construct and verify an algorithm")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--verify", choices=("exhaustive", "samples"), default="exhaustive")
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    common(p)
    p.set_defaults(func=cmd_build_multiplier)

    p = sub.add_parser("construct-divisor", help="solve l(k_i D - G_i) = 0")
    p.add_argument("--config", required=True, help="JSON file ('-' for stdin)")
    common(p)
    p.set_defaults(func=cmd_construct_divisor)

    p = sub.add_parser("verify", help="re-verify an algorithm file")
    p.add_argument("file")
    p.add_argument("--mode", choices=("exhaustive", "samples"), default="exhaustive")
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("code", help="build an evaluation code and check it")
    p.add_argument("--config", required=True)
    p.add_argument("--check", choices=("exhaustive", "samples", "none"),
                   default="exhaustive")
    p.add_argument("--samples", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    common(p)
    p.set_defaults(func=cmd_code)

    b = sub.add_parser("bounds", help="exact bound evaluators")
    bsub = b.add_subparsers(dest="table", required=True)

    p = bsub.add_parser("stv")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--A", required=True)
    p.add_argument("--Aprime", default=None)
    common(p)
    p.set_defaults(func=cmd_bounds_stv)

    p = bsub.add_parser("rq")
    p.add_argument("--nu", required=True)
    p.add_argument("--q", type=int, default=None)
    common(p)
    p.set_defaults(func=cmd_bounds_rq)

    p = bsub.add_parser("kappa")
    p.add_argument("--nu", required=True)
    p.add_argument("--q", type=int, default=None)
    common(p)
    p.set_defaults(func=cmd_bounds_kappa)

    p = bsub.add_parser("mu")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--rows", default=None, help="extra inventory rows g:n1,g:n1,...")
    common(p)
    p.set_defaults(func=cmd_bounds_mu)

    p = bsub.add_parser("ballet")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    common(p)
    p.set_defaults(func=cmd_bounds_ballet)

    p = bsub.add_parser("co")
    p.add_argument("--config", required=True)
    common(p)
    p.set_defaults(func=cmd_bounds_co)

    p = bsub.add_parser("n1-3n2")
    for name in ("q", "k", "g", "n1", "n2"):
        p.add_argument(f"--{name}", type=int, required=True)
    common(p)
    p.set_defaults(func=cmd_bounds_n1_3n2)

    p = bsub.add_parser("dv")
    for name in ("q", "g", "n1", "n2"):
        p.add_argument(f"--{name}", type=int, required=True)
    common(p)
    p.set_defaults(func=cmd_bounds_dv)

    p = bsub.add_parser("genus-x0")
    p.add_argument("--N", type=int, default=None)
    p.add_argument("--max-N", dest="max_N", type=int, default=None)
    common(p)
    p.set_defaults(func=cmd_bounds_genus_x0)

    p = bsub.add_parser("x0-points")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--N", type=int, required=True)
    common(p)
    p.set_defaults(func=cmd_bounds_x0_points)

    p = sub.add_parser("psi", help="Dedekind psi and psi-ceilings")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--x", default=None)
    p.add_argument("--p", type=int, default=None)
    common(p)
    p.set_defaults(func=cmd_psi)

    p = sub.add_parser("prime-eps", help="max prime-gap ratio on a window")
    p.add_argument("--from", type=int, required=True)
    p.add_argument("--limit", type=int, required=True)
    common(p)
    p.set_defaults(func=cmd_prime_eps)

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except (ch.NoCurveFoundError, ch.PointNotFoundError,
            InfeasibleWindowError, PoolTooSmallError) as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
