"""Command-line front end.

Exit codes: 0 success / battery pass, 1 battery fail, 2 input error,
3 internal disagreement between equivalent definition checks.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

from .families import (
    BatteryConfig,
    BatteryDisagreement,
    CLCandidate,
    complement,
    hyperplane_family,
    point_pencil_family,
    run_battery,
)
from .geometry import GeometrySizeError
from .io import (
    CLKSETError,
    DiskCache,
    load_family,
    resolve_cache_dir,
    save_family,
)
from .qformulas import (
    SchemeParams,
    eigenvalue_p,
    excludes_skew_subfamily,
    member_meet_count,
    pair_meet_count_bound,
    pair_skew_count_bound,
    parameter_range,
    qbinom,
    skew_pair_outer_point,
    skew_pair_span_point,
    skew_pair_total,
    within_classification_bound,
)
from .scheme import bundle_for
from .search import SearchConfig, nonexistence_window, search_all

EXIT_OK = 0
EXIT_BATTERY_FAIL = 1
EXIT_INPUT = 2
EXIT_DISAGREEMENT = 3


def _params(args) -> SchemeParams:
    return SchemeParams(n=args.n, k=args.k, q=args.q)


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"bad rational {text!r}: {exc}") from None


def _emit(data: dict, fmt: str) -> None:
    if fmt == "json":
        print(json.dumps(data, indent=2, default=str))
    else:
        for key, value in data.items():
            if isinstance(value, list):
                print(f"{key}:")
                for item in value:
                    print(f"  {item}")
            else:
                print(f"{key} = {value}")


def cmd_formulas(args) -> int:
    p = _params(args)
    data: dict = {
        "params": f"PG({p.n},{p.q}) k={p.k}",
        "points": p.num_points,
        "kspaces": p.num_kspaces,
        "pencil_size": p.pencil_size,
        "disjoint_from_one": p.disjoint_from_one,
    }
    lo, hi = parameter_range(p)
    data["parameter_range"] = f"[{lo}, {hi}]"
    data["qbinom_row"] = [qbinom(p.n + 1, b, p.q) for b in range(p.n + 2)]
    data["P_matrix"] = [
        "P[%d] = %s" % (j, [eigenvalue_p(j, i, p) for i in range(p.k + 2)])
        for j in range(p.k + 2)
    ]
    if p.n >= 2 * p.k + 1:
        data["skew_pair_total"] = skew_pair_total(p)
        data["skew_pair_span_point"] = skew_pair_span_point(p)
        if p.n > 2 * p.k + 1:
            data["skew_pair_outer_point"] = skew_pair_outer_point(p)
    if args.x is not None:
        x = args.x
        data["x"] = x
        data["family_size"] = x * qbinom(p.n, p.k, p.q)
        if p.n >= 2 * p.k + 1:
            data["member_meet_count"] = member_meet_count(p, x)
        if p.n > 3 * p.k + 1:
            data["pair_skew_count_bound"] = pair_skew_count_bound(p, x)
            data["pair_meet_count_bound"] = pair_meet_count_bound(p, x)
        if p.n >= 3 * p.k + 2:
            data["within_bound"] = within_classification_bound(p, x)
        if args.c is not None and p.n > 2 * p.k + 1:
            audit = excludes_skew_subfamily(args.c, p, x)
            data["skew_exclusion"] = (
                f"holds={audit.holds} lhs={audit.lhs} rhs={audit.rhs}"
            )
    if args.i is not None and args.j is not None:
        data[f"P[{args.j}][{args.i}]"] = eigenvalue_p(args.j, args.i, p)
    _emit(data, args.format)
    return EXIT_OK


def _build_ctx(p: SchemeParams, cache_dir: str | None):
    from .geometry import geometry

    ctx = geometry(p.n, p.k, p.q)
    return ctx, bundle_for(ctx, DiskCache(resolve_cache_dir(cache_dir)))


def cmd_verify(args) -> int:
    try:
        cand = load_family(args.infile)
    except (CLKSETError, OSError, GeometrySizeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    ctx = cand.ctx
    _, bundle = _build_ctx(ctx.params, args.cache_dir)
    config = BatteryConfig.fast() if args.battery == "fast" else BatteryConfig()
    if args.spreads == "reduced":
        config = BatteryConfig(checks=config.checks, spread_mode="reduced")
    try:
        report = run_battery(cand, bundle, config)
    except BatteryDisagreement as exc:
        print("internal disagreement between definition checks:", file=sys.stderr)
        for line in exc.report.lines():
            print("  " + line, file=sys.stderr)
        return EXIT_DISAGREEMENT
    if args.format == "json":
        payload = {
            "n": ctx.params.n,
            "q": ctx.params.q,
            "k": ctx.params.k,
            "x_num": report.x.numerator,
            "x_den": report.x.denominator,
            "size": report.size,
            "verdicts": {
                name: res.verdict.value for name, res in report.results.items()
            },
            "witness": next(
                (
                    str(res.witness)
                    for res in report.results.values()
                    if res.witness is not None
                ),
                None,
            ),
            "passed": report.passed,
        }
        print(json.dumps(payload, indent=2))
    else:
        for line in report.lines():
            print(line)
    return EXIT_OK if report.passed else EXIT_BATTERY_FAIL


def cmd_construct(args) -> int:
    try:
        if args.kind == "complement":
            if not args.infile:
                print("error: --kind complement requires --in", file=sys.stderr)
                return EXIT_INPUT
            base = load_family(args.infile)
            cand = complement(base)
        else:
            if None in (args.n, args.q, args.k):
                print(
                    f"error: --kind {args.kind} requires --n --q --k",
                    file=sys.stderr,
                )
                return EXIT_INPUT
            p = _params(args)
            from .geometry import geometry

            ctx = geometry(p.n, p.k, p.q)
            if args.kind == "pencil":
                cand = point_pencil_family(ctx, args.point_id)
            elif args.kind == "hyperplane":
                cand = hyperplane_family(ctx, ctx.hyperplanes()[args.hyperplane_id])
            elif args.kind == "spread":
                cand = CLCandidate(ctx, ctx.construct_spread())
            else:
                print(f"error: unknown kind {args.kind}", file=sys.stderr)
                return EXIT_INPUT
    except (CLKSETError, OSError, ValueError, IndexError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    save_family(args.out, cand)
    print(f"wrote {len(cand)} k-spaces to {args.out}")
    return EXIT_OK


def cmd_search(args) -> int:
    try:
        p = _params(args)
        from .geometry import geometry

        ctx = geometry(p.n, p.k, p.q)
    except (ValueError, GeometrySizeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    _, bundle = _build_ctx(p, args.cache_dir)
    config = SearchConfig(threads=args.threads)
    summary_lines = []
    try:
        if args.window:
            lo, hi = args.window
            report = nonexistence_window(ctx, lo, hi, config, bundle)
            total = sum(r.families for r in report.rows)
            for row in report.rows:
                line = (
                    f"x={row.x} size={row.size} families={row.families}"
                    + (f" reason={row.reason}" if row.reason else "")
                    + (
                        f" within_bound={row.within_bound}"
                        if row.within_bound is not None
                        else ""
                    )
                )
                if row.skew_audit is not None:
                    line += (
                        f" skew_exclusion(holds={row.skew_audit.holds},"
                        f" lhs={row.skew_audit.lhs}, rhs={row.skew_audit.rhs})"
                    )
                summary_lines.append(line)
            summary_lines.append(f"total: {total} families")
            print(f"{total} families")
            families = []
        elif args.x is not None:
            result = search_all(ctx, args.x, config, bundle)
            families = result.families
            summary_lines.append(
                f"x={args.x} families={len(families)}"
                + (f" reason={result.reason}" if result.reason else "")
            )
            summary_lines.append(f"nodes={result.stats.nodes} prunes={result.stats.prunes}")
            print(f"{len(families)} families")
        else:
            print("error: provide --x or --window", file=sys.stderr)
            return EXIT_INPUT
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        for idx, fam in enumerate(families):
            save_family(
                os.path.join(args.out, f"family_{idx:04d}.clkset"),
                CLCandidate(ctx, fam),
            )
        from .io import atomic_write

        atomic_write(
            os.path.join(args.out, "summary.txt"), "\n".join(summary_lines) + "\n"
        )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="clkset",
        description="Exact computations with special k-space families in PG(n,q)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_params(sp, require=True):
        sp.add_argument("--n", type=int, required=require)
        sp.add_argument("--q", type=int, required=require)
        sp.add_argument("--k", type=int, required=require)

    sp = sub.add_parser("formulas", help="evaluate the closed-form counts")
    add_params(sp)
    sp.add_argument("--x", type=_fraction, default=None)
    sp.add_argument("--i", type=int, default=None)
    sp.add_argument("--j", type=int, default=None)
    sp.add_argument("--c", type=int, default=None)
    sp.add_argument("--format", choices=("text", "json"), default="text")
    sp.set_defaults(func=cmd_formulas)

    sp = sub.add_parser("verify", help="run the definition battery on a file")
    sp.add_argument("--in", dest="infile", required=True)
    sp.add_argument("--battery", choices=("all", "fast"), default="all")
    sp.add_argument("--spreads", choices=("exhaustive", "reduced"), default="exhaustive")
    sp.add_argument("--cache-dir", default=None)
    sp.add_argument("--format", choices=("text", "json"), default="text")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("construct", help="write a known family to a file")
    sp.add_argument(
        "--kind", choices=("pencil", "hyperplane", "spread", "complement"), required=True
    )
    add_params(sp, require=False)
    sp.add_argument("--point-id", type=int, default=0)
    sp.add_argument("--hyperplane-id", type=int, default=0)
    sp.add_argument("--in", dest="infile", default=None)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_construct)

    sp = sub.add_parser("search", help="exhaustively search a parameter or window")
    add_params(sp)
    sp.add_argument("--x", type=_fraction, default=None)
    sp.add_argument("--window", nargs=2, type=_fraction, default=None)
    sp.add_argument("--threads", type=int, default=1)
    sp.add_argument("--out", default=None)
    sp.add_argument("--cache-dir", default=None)
    sp.set_defaults(func=cmd_search)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except GeometrySizeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
