"""Command-line front end: ``zernlets {points,synth,fit,decompose,validate}``."""

from __future__ import annotations

import argparse
import contextlib
import json
import logging
import os
import sys

import numpy as np

from . import fitting, mra, sampling, validation
from .scaling import IllConditionedError
from .wavelets import IndependenceError, block_range, top_degree
from .zernike import dim_v, dim_w, eval_poly

log = logging.getLogger("zernlets")


class UsageError(Exception):
    pass


def _require_input(path):
    if path is None:
        raise UsageError("--input is required")
    if not os.path.isfile(path):
        raise UsageError(f"input file not found: {path}")


def _output_dir(path):
    if path is None:
        raise UsageError("--output is required")
    os.makedirs(path, exist_ok=True)
    return path


def _level_or_degree(args):
    if args.level is not None:
        return args.level
    if args.degree is not None:
        return args.degree
    raise UsageError("give --degree (or --level for wavelet points)")


def cmd_points(args):
    N = _level_or_degree(args)
    if N < 0:
        raise UsageError("degree must be nonnegative")
    if args.wavelet:
        cand = sampling.regular_points(top_degree(N))
        start, stop = block_range(N)
        if args.strategy == "fekete":
            pts = sampling.approximate_fekete(cand, start, stop)
        else:
            pts = sampling.random_subset(cand, dim_w(N), args.seed)
    else:
        pts = sampling.regular_points(N)
    out = args.output if args.output else sys.stdout
    if out is sys.stdout:
        _write_points_stream(sys.stdout, pts)
    else:
        sampling.write_points_csv(out, pts)
    log.info("wrote %d points", len(pts))
    return 0


def _write_points_stream(fh, pts):
    fh.write("j,rho,theta\n")
    for j, (rho, th) in enumerate(pts.points, start=1):
        fh.write(f"{j},{rho:.17g},{th:.17g}\n")


def _parse_params(items):
    params = {}
    for item in items or []:
        key, sep, value = item.partition("=")
        if not sep:
            raise UsageError(f"--param expects key=value, got {item!r}")
        params[key.strip()] = float(value)
    return params


def cmd_synth(args):
    if args.output is None:
        raise UsageError("--output is required")
    samples = fitting.synth_surface(
        args.kind, _parse_params(args.param), args.noise, args.seed, args.samples, args.sampling
    )
    fitting.export_samples(args.output, samples, cartesian=args.cartesian)
    log.info("wrote %d %s samples to %s", len(samples), args.kind, args.output)
    return 0


def _load_and_fit(args):
    if args.degree is None or args.degree < 0:
        raise UsageError("--degree must be given and nonnegative")
    if args.output is None:
        raise UsageError("--output is required")
    _require_input(args.input)
    samples = fitting.ingest(args.input, normalize=args.normalize, aperture=args.aperture)
    return samples, fitting.least_squares_fit(samples, args.degree)


def _grid_values(poly, res):
    r, theta = fitting.polar_grid(res)
    return r, theta, np.real(eval_poly(poly, r, theta))


def cmd_fit(args):
    samples, fit = _load_and_fit(args)
    summary = fitting.fit_summary(fit)
    sphere_grid = None
    if len(samples) >= 4:
        try:
            sphere = fitting.best_fit_sphere(samples)
        except ValueError as exc:
            log.warning("no best-fit sphere: %s", exc)
        else:
            summary["sphere"] = {"center": list(sphere.center), "radius": sphere.radius}
            sphere_grid = sphere
    if fit.degree >= 2:
        summary["hierarchical_discrepancy"] = fitting.hierarchical_discrepancy(fit)
    r, theta, values = _grid_values(fit.polynomial, args.grid_res)
    out = _output_dir(args.output)
    fitting.write_coefficients_csv(os.path.join(out, "coefficients.csv"), fit)
    fitting.dump_json(os.path.join(out, "summary.json"), summary)
    fitting.write_grid_csv(os.path.join(out, "fit_grid.csv"), r, theta, values)
    if sphere_grid is not None:
        a = samples.aperture
        h = sphere_grid.surface(a * r * np.cos(theta), a * r * np.sin(theta))
        fitting.write_grid_csv(os.path.join(out, "difference_grid.csv"), r, theta, values - h)
    norm = fit.residual_l2 if args.norm == "l2" else fit.residual_rms
    print(f"degree {fit.degree}  J {dim_v(fit.degree)}  samples {len(samples)}")
    print(f"residual ({args.norm}) {norm:.17g}")
    print(f"design condition {fit.condition:.6g}")
    return 0


def cmd_decompose(args):
    if args.degree is None or not mra.is_power_of_two(args.degree):
        raise UsageError("--degree must be a power of 2 for decomposition")
    samples, fit = _load_and_fit(args)
    ladder = mra.MraLadder.build(args.degree)
    bases = mra.build_level_bases(ladder, args.strategy, args.seed)
    d = fitting.wavelet_analysis(fit, ladder, bases)
    res = fitting.reconstruction_residuals(fit, d)
    r, theta, values = _grid_values(mra.reconstruct(d), args.grid_res)
    out = _output_dir(args.output)
    mra.write_decomposition_csv(os.path.join(out, "decomposition.csv"), d)
    fitting.write_grid_csv(os.path.join(out, "reconstruction_grid.csv"), r, theta, values)
    summary = fitting.fit_summary(fit)
    summary.update(
        {
            "strategy": args.strategy,
            "seed": args.seed,
            "coefficients": d.count,
            "levels": {f"W_{lc.level}": {"size": int(lc.analysis.size), "energy": lc.energy} for lc in d.levels},
            "residuals": res,
        }
    )
    fitting.dump_json(os.path.join(out, "summary.json"), summary)

    print(f"{'level':>6} {'size':>5} {'energy':>24}")
    print(f"{'V_0':>6} {1:>5} {abs(d.v0) ** 2:>24.17g}")
    for lc in d.levels:
        print(f"{'W_' + str(lc.level):>6} {lc.analysis.size:>5} {lc.energy:>24.17g}")
    print(f"total coefficients {d.count}")
    flat = [(abs(a), lc.level, mu, om) for lc in d.levels for a, (mu, om) in zip(lc.analysis, lc.points)]
    flat.sort(key=lambda t: -t[0])
    print(f"top {args.top_k} coefficients (|<f, psi>|, level, x, y):")
    for mag, lev, mu, om in flat[: args.top_k]:
        print(f"  {mag:.6g}  W_{lev}  {mu * np.cos(om):+.4f} {mu * np.sin(om):+.4f}")
    zn = res[f"zernike_{args.norm}"]
    wn = res[f"wavelet_{args.norm}"]
    print(f"residual ({args.norm}) zernike {zn:.17g}  wavelet {wn:.17g}  gap {abs(zn - wn):.3g}")
    return 0


def cmd_validate(args):
    report = validation.run_suites(args.max_degree, args.seed, args.inject_fault)
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    for name, s in report["suites"].items():
        log.info("%-20s %s  max error %.3e (tol %.0e)", name, "ok" if s["passed"] else "FAIL",
                 s["max_error"], s["tolerance"])
    return 0 if report["passed"] else 1


def build_parser():
    p = argparse.ArgumentParser(prog="zernlets", description="Zernike wavelets on the unit disk")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, degree=True):
        if degree:
            sp.add_argument("-N", "--degree", type=int)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--output")

    sp = sub.add_parser("points", help="regular points or wavelet parameter points")
    common(sp)
    sp.add_argument("--wavelet", action="store_true", help="parameter points for W_level")
    sp.add_argument("--level", type=int)
    sp.add_argument("--strategy", choices=["fekete", "random"], default="fekete")
    sp.set_defaults(func=cmd_points)

    sp = sub.add_parser("synth", help="synthetic corneal elevation samples")
    common(sp, degree=False)
    sp.add_argument("--kind", choices=["normal", "astigmatism", "keratoconus"], default="normal")
    sp.add_argument("--param", action="append", metavar="KEY=VALUE")
    sp.add_argument("--noise", type=float, default=0.0)
    sp.add_argument("--samples", type=int, default=10200)
    sp.add_argument("--sampling", choices=["rings", "random"], default="rings")
    sp.add_argument("--cartesian", action="store_true")
    sp.set_defaults(func=cmd_synth)

    for name, func, helptext in (
        ("fit", cmd_fit, "least-squares Zernike fit"),
        ("decompose", cmd_decompose, "fit then wavelet decomposition"),
    ):
        sp = sub.add_parser(name, help=helptext)
        common(sp)
        sp.add_argument("--input")
        sp.add_argument("--normalize", action="store_true", help="scale radii by their maximum")
        sp.add_argument("--aperture", type=float, help="physical radius of r = 1 (sphere fit units)")
        sp.add_argument("--grid-res", type=int, default=50)
        sp.add_argument("--norm", choices=["l2", "rms"], default="l2")
        if name == "decompose":
            sp.add_argument("--strategy", choices=["fekete", "random"], default="fekete")
            sp.add_argument("--top-k", type=int, default=10)
        sp.set_defaults(func=func)

    sp = sub.add_parser("validate", help="run the numerical self-checks")
    sp.add_argument("--max-degree", "-N", type=int, default=8)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--output")
    sp.add_argument("--inject-fault", action="store_true", help=argparse.SUPPRESS)
    sp.set_defaults(func=cmd_validate)
    return p


def _thread_limit():
    n = os.environ.get("ZERNLETS_THREADS")
    if not n:
        return contextlib.nullcontext()
    from threadpoolctl import threadpool_limits

    return threadpool_limits(limits=int(n))


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        with _thread_limit():
            return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (IllConditionedError, IndependenceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (ValueError, OSError, sampling.FeketeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
