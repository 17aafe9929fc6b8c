"""Command-line interface: info, periods, eval, series, verify, report.

All numeric output is JSON with complex numbers as [re, im] pairs; a
fixed (argv, seed) pair produces byte-identical reports.  Exit codes:
0 = success and every verification passed, 1 = some identity failed,
2 = usage or input error.
"""

from __future__ import annotations

import argparse
import cmath
import json
import os
import sys

import numpy as np

from . import __version__
from .curves import (
    CurveError,
    CurveSpec,
    PRESETS,
    discriminant,
    load_curve,
)
from .identities import RunConfig, reports_to_json, run_trials
from .periods import LatticeVector, PeriodError, period_matrices
from .sigma import SigmaError, build_context, quasi_periodicity_residual, sigma
from .series import (
    SeriesError,
    derive_p1_coefficients,
    equipentamic_p1_residual,
    equipentamic_p2_residual,
    genus1_identity_residual,
    rational_cube_identity,
    sigma_series,
)


class UsageError(Exception):
    pass


def _c2j(z: complex) -> list[float]:
    return [z.real, z.imag]


def _mat2j(m) -> list:
    return [[_c2j(complex(x)) for x in row] for row in m]


def _load_curve_arg(args) -> CurveSpec:
    if getattr(args, "curve", None):
        try:
            return load_curve(args.curve)
        except FileNotFoundError as e:
            raise UsageError(f"curve spec file not found: {args.curve}") from e
        except (json.JSONDecodeError, CurveError, ValueError) as e:
            raise UsageError(f"malformed curve spec: {e}") from e
    if getattr(args, "family", None):
        try:
            return _sample_family_curve(args.family, np.random.default_rng(args.seed))
        except KeyError as e:
            raise UsageError(f"unknown family preset {args.family!r}") from e
    raise UsageError("need --curve FILE or --family NAME")


def _sample_family_curve(family: str, rng) -> CurveSpec:
    """Weight-consistent random moduli: |mu_j|^(1/j) <= 1 keeps branch
    points O(1); resamples singular or ill-conditioned draws."""
    from .periods import IllConditionedPeriods, branch_points

    if family not in PRESETS:
        raise KeyError(family)
    for _ in range(60):
        def draw(j, lo=0.45):
            r = rng.uniform(lo, 1.0)
            th = rng.uniform(0.0, 2 * np.pi)
            return (r * cmath.exp(1j * th)) ** j

        if family == "equianharmonic":
            c = PRESETS[family](draw(3), draw(6))
        elif family == "lemniscate":
            c = PRESETS[family](draw(4))
        elif family == "burnside":
            c = PRESETS[family](draw(4, lo=0.3), draw(8))
        elif family == "equipentamic":
            c = PRESETS[family](draw(5, lo=0.3), draw(10))
        else:
            c = PRESETS[family](draw(3), draw(4), draw(6))
        try:
            branch_points(c)
        except (IllConditionedPeriods, PeriodError):
            continue
        try:
            from .periods import period_matrices as _pm

            _pm(c)
        except PeriodError:
            continue
        return c
    raise UsageError(f"could not sample a well-conditioned {family} curve")


def cmd_info(args) -> int:
    curve = _load_curve_arg(args)
    doc = {
        "family": curve.family.value,
        "label": curve.label(),
        "a": curve.a,
        "m": curve.m,
        "genus": curve.genus,
        "automorphism_order": curve.automorphism_order,
        "mu": {str(j): _c2j(v) for j, v in sorted(curve.mu.items())},
        "discriminant": _c2j(discriminant(curve)),
        "analytic_supported": curve.analytic_supported,
    }
    print(json.dumps(doc, indent=2, sort_keys=True))
    return 0


def cmd_periods(args) -> int:
    curve = _load_curve_arg(args)
    pd = period_matrices(curve, tol=args.tol)
    doc = {
        "genus": pd.genus,
        "omega1": _mat2j(pd.omega1),
        "omega2": _mat2j(pd.omega2),
        "eta1": _mat2j(pd.eta1),
        "eta2": _mat2j(pd.eta2),
        "tau": _mat2j(pd.tau),
        "branch_points": [_c2j(b) for b in pd.branch_points],
        "kappa": _c2j(pd.kappa),
        "homology": pd.homology,
    }
    print(json.dumps(doc, indent=2, sort_keys=True))
    return 0


def _parse_u(text: str, genus: int):
    parts = text.split(";")
    if len(parts) != genus:
        raise UsageError(f"--u needs {genus} components for genus {genus}")
    out = []
    for p in parts:
        re_im = p.split(",")
        if len(re_im) != 2:
            raise UsageError("each u component must be re,im")
        out.append(complex(float(re_im[0]), float(re_im[1])))
    return tuple(out)


def cmd_eval(args) -> int:
    curve = _load_curve_arg(args)
    ctx = build_context(curve, dps=args.dps)
    u = _parse_u(args.u, ctx.genus)
    if args.what == "sigma":
        val = complex(sigma(ctx, u))
        checks = []
        for l1, l2 in ([(1,) * ctx.genus, (0,) * ctx.genus], [(0,) * ctx.genus, (1,) * ctx.genus]):
            lat = LatticeVector.from_integers(ctx.periods, l1, l2)
            checks.append(quasi_periodicity_residual(ctx, u, lat))
        doc = {
            "sigma": _c2j(val),
            "quasi_periodicity_residuals": checks,
            "u": [_c2j(z) for z in u],
        }
    else:
        from .wp import WpEvaluator

        ev = WpEvaluator(ctx, u, order=max(2, len(args.indices)))
        val = complex(ev.wp(args.indices))
        doc = {
            "wp_indices": args.indices,
            "value": _c2j(val),
            "abs_sigma": abs(complex(sigma(ctx, u))),
            "divisor_threshold": ctx.divisor_threshold(),
            "u": [_c2j(z) for z in u],
        }
    print(json.dumps(doc, indent=2, sort_keys=True))
    return 0


SERIES_IDENTITY_ALIASES = {
    "A1": "A1", "G1_TWOTERM": "A1",
    "FS": "FS", "G1_FS": "FS",
    "A1e2_plus": "A1e2_plus", "G1_EQUI_3TERM_PLUS": "A1e2_plus",
    "A1e2_minus": "A1e2_minus", "G1_EQUI_3TERM_MINUS": "A1e2_minus",
    "A1e3": "A1e3", "G1_EQUI_3VAR": "A1e3",
    "Ai1": "Ai1", "G1_LEM_2TERM": "Ai1",
}


def cmd_series(args) -> int:
    fam = args.curve_family
    if args.verify:
        ident = args.verify
        if ident in ("RATIONAL_CUBE",):
            ok = rational_cube_identity()
            print(json.dumps({"identity": ident, "residual_zero": ok}))
            return 0 if ok else 1
        if ident in ("eqi_p1", "G2_EQUIPENTAMIC_P1"):
            coeffs = derive_p1_coefficients(1)
            res = equipentamic_p1_residual(1, coeffs=coeffs)
            doc = {
                "identity": ident,
                "coefficients": {k: [v.numerator, v.denominator] for k, v in coeffs.items()},
                "residual_zero": res.is_zero(),
            }
            print(json.dumps(doc, indent=2, sort_keys=True))
            return 0 if res.is_zero() else 1
        if ident in ("eqi_p2", "G2_EQUIPENTAMIC_P2"):
            res = equipentamic_p2_residual(1)
            print(json.dumps({"identity": ident, "residual_zero": res.is_zero()}))
            return 0 if res.is_zero() else 1
        if ident not in SERIES_IDENTITY_ALIASES:
            raise UsageError(f"no symbolic check for identity {ident!r}")
        udeg = max(9, (args.weight + 1) // 2 * 2 + 1)
        res = genus1_identity_residual(SERIES_IDENTITY_ALIASES[ident], udeg=udeg)
        doc = {"identity": ident, "residual_zero": res.is_zero()}
        if not res.is_zero():
            e, c = res.leading()
            doc["first_offending_monomial"] = {
                "vars": res.vars, "exponents": list(e), "coefficient": str(c),
            }
        print(json.dumps(doc, indent=2, sort_keys=True))
        return 0 if res.is_zero() else 1
    gs = sigma_series(fam, args.weight)
    print(f"# sigma series for {fam}, truncation weight {args.weight}")
    print(str(gs.poly))
    return 0


def _sample_or_load_curves(args, rng) -> list[CurveSpec]:
    if args.curve:
        return [_load_curve_arg(args)]
    return [_sample_family_curve(args.family, rng) for _ in range(args.curves)]


def cmd_verify(args) -> int:
    rng = np.random.default_rng(args.seed)
    curves = _sample_or_load_curves(args, rng)
    config = RunConfig(
        trials=args.trials,
        seed=args.seed,
        tolerance=args.tol,
        dps=args.dps,
        identities=tuple(args.identity) if args.identity else None,
    )
    workers = int(os.environ.get("CYCLOSIGMA_WORKERS", "1"))
    all_reports = []
    if workers > 1 and len(curves) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as pool:
            for reps in pool.map(lambda c: run_trials(c, config), curves):
                all_reports.extend(reps)
    else:
        for curve in curves:
            all_reports.extend(run_trials(curve, config))
    text = reports_to_json(all_reports, config)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        print(text)
    if args.csv:
        _write_csv(args.csv, all_reports)
    ok = all(r.pass_ for r in all_reports)
    summary = {
        "identities": len(all_reports),
        "max_rel_residual": max((r.max_rel_residual for r in all_reports), default=0.0),
        "all_pass": ok,
    }
    print(json.dumps({"summary": summary}, sort_keys=True), file=sys.stderr)
    return 0 if ok else 1


def _write_csv(path: str, reports) -> None:
    import csv

    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["identity", "curve", "trials", "max_rel_residual", "pass"])
        for r in reports:
            label = r.curve.get("family", "?") if isinstance(r.curve, dict) else "?"
            w.writerow([r.id, label, len(r.trials), f"{r.max_rel_residual:.3e}", r.pass_])


def cmd_report(args) -> int:
    """Residual summary across every family preset, as JSON and CSV."""
    rows = []
    ok = True
    for fam in ("equianharmonic", "lemniscate", "cubic", "equipentamic", "burnside"):
        rng = np.random.default_rng([args.seed, len(fam)])
        for k in range(args.curves):
            curve = _sample_family_curve(fam, rng)
            config = RunConfig(trials=args.trials, seed=args.seed + k, tolerance=args.tol)
            for rep in run_trials(curve, config):
                ok = ok and rep.pass_
                rows.append(
                    {
                        "family": fam,
                        "identity": rep.id,
                        "max_rel_residual": rep.max_rel_residual,
                        "pass": rep.pass_,
                    }
                )
    doc = {"version": __version__, "seed": args.seed, "rows": rows, "all_pass": ok}
    print(json.dumps(doc, indent=2, sort_keys=True))
    if args.csv:
        import csv

        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["family", "identity", "max_rel_residual", "pass"])
            for r in rows:
                w.writerow([r["family"], r["identity"], f"{r['max_rel_residual']:.3e}", r["pass"]])
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="cyclosigma",
        description="sigma/wp evaluation and addition-formula verification "
        "on cyclotomic elliptic and genus-2 hyperelliptic curves",
    )
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="cmd", required=True)

    def add_curve_opts(sp, family_default=None):
        sp.add_argument("--curve", help="curve spec JSON file")
        sp.add_argument("--family", default=family_default, help="named family preset")
        sp.add_argument("--seed", type=int, default=1)

    sp = sub.add_parser("info", help="curve family, genus, discriminant")
    add_curve_opts(sp)

    sp = sub.add_parser("periods", help="period matrices as JSON")
    add_curve_opts(sp)
    sp.add_argument("--tol", type=float, default=1e-13)

    sp = sub.add_parser("eval", help="evaluate sigma or wp at a point")
    sp.add_argument("what", choices=["sigma", "wp"])
    add_curve_opts(sp)
    sp.add_argument("--u", required=True, help="semicolon-separated re,im pairs")
    sp.add_argument("--indices", default="11", help="wp index string, e.g. 122")
    sp.add_argument("--dps", type=int, default=None, help="mpmath digits (optional)")

    sp = sub.add_parser("series", help="sigma expansion / symbolic identity check")
    sp.add_argument("--curve-family", required=True)
    sp.add_argument("--weight", type=int, default=13)
    sp.add_argument("--verify", help="identity id for an exact residual check")

    sp = sub.add_parser("verify", help="randomized identity trials")
    add_curve_opts(sp)
    sp.add_argument("--curves", type=int, default=3, help="random curves per family")
    sp.add_argument("--trials", type=int, default=10)
    sp.add_argument("--tol", type=float, default=1e-7)
    sp.add_argument("--identity", action="append", help="restrict to identity id(s)")
    sp.add_argument("--dps", type=int, default=None)
    sp.add_argument("--out", help="write the JSON report to a file")
    sp.add_argument("--csv", help="write a CSV residual summary")

    sp = sub.add_parser("report", help="residual table across all family presets")
    sp.add_argument("--curves", type=int, default=1)
    sp.add_argument("--trials", type=int, default=5)
    sp.add_argument("--tol", type=float, default=1e-6)
    sp.add_argument("--seed", type=int, default=1)
    sp.add_argument("--csv", help="CSV output path")

    return p


COMMANDS = {
    "info": cmd_info,
    "periods": cmd_periods,
    "eval": cmd_eval,
    "series": cmd_series,
    "verify": cmd_verify,
    "report": cmd_report,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse exits 2 on usage errors and 0 on --help
        return int(e.code or 0)
    try:
        return COMMANDS[args.cmd](args)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (CurveError, SeriesError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (PeriodError, SigmaError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
