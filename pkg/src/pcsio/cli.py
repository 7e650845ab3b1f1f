"""Command-line entry point.

Exit status: 0 yes, 1 no (not bounded, not Fredholm, image not closed,
hypothesis fails, oracle disagrees), 2 input error, 3 analysis precondition
failure, 4 numerical non-convergence.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConvergenceError, InputError, PreconditionError
from .fredholm import (
    check_boundedness,
    closed_image,
    essential_spectrum_cloud,
    fredholm_sio,
    local_spectrum,
)
from .horns import classify
from .indices import powerlikeness_indices, profile_indices
from .io import dump_json, load_input
from .problem import carleson_constant, spirality_delta, validate_exponent
from .reports import horn_layers, write_spectra_csv, write_spectra_svg

COMMANDS = (
    "indices",
    "validate",
    "bounded",
    "fredholm",
    "closed-image",
    "local-spectrum",
    "ess-spectrum",
    "symbol-det",
    "oracle",
)


def _c(z):
    z = complex(z)
    return [z.real, z.imag]


def parse_overrides(items):
    out = {}
    for item in items:
        if "=" not in item:
            raise InputError(f"override {item!r} is not key=value")
        key, val = item.split("=", 1)
        parts = val.split(",")
        try:
            nums = [float(p) for p in parts]
        except ValueError:
            out[key] = val
            continue
        out[key] = complex(nums[0], nums[1]) if len(nums) == 2 else nums[0]
    return out


def build_parser():
    ap = argparse.ArgumentParser(prog="pcsio", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("overrides", nargs="*", help="key=value settings, e.g. t=1,0 threshold=0.05")
    ap.add_argument("--input", required=True, help="problem JSON")
    ap.add_argument("--out", default=".", help="output directory")
    ap.add_argument("--grid-t", type=int, default=256, help="continuous t-grid size")
    ap.add_argument("--grid-z", type=int, default=41, help="lambda grid size per axis / horn levels")
    ap.add_argument("--section-n", type=int, default=512)
    ap.add_argument("--fft-size", type=int, default=8192)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--margin-warn", type=float, default=1e-6)
    ap.add_argument("--version", action="version", version=__version__)
    return ap


def _need_symbol(bundle):
    if bundle.symbol is None:
        raise InputError("this command needs a 'symbol' in the input")
    return bundle.symbol


def _default_point(bundle):
    if bundle.symbol is not None and bundle.symbol.jumps:
        return bundle.symbol.jumps[0].t
    if bundle.problem.weight.nodes:
        return bundle.problem.weight.nodes[0].t
    return complex(bundle.problem.curve.points[0])


def cmd_indices(bundle, args, ov):
    pr = bundle.problem
    nodes = []
    for node in pr.weight.nodes:
        pair = profile_indices(node.profile, pr.curve.total_length)
        entry = {"t": _c(node.t), "m": pair.lower, "M": pair.upper, "details": pair.details}
        try:
            pl = powerlikeness_indices(pr, node.t)
            entry["powerlikeness"] = {"lower": pl.lower, "upper": pl.upper}
        except PreconditionError as exc:
            entry["powerlikeness"] = {"unavailable": str(exc)}
        nodes.append(entry)
    return 0, {"nodes": nodes}


def cmd_validate(bundle, args, ov):
    pr = bundle.problem
    lh = validate_exponent(pr.exponent, pr.curve)
    curve = pr.curve
    R = np.geomspace(2 * curve.resolution, curve.diameter, 200)
    carleson = carleson_constant(curve, R_grid=R, n_t=200)
    spir = []
    points = [t for t, _ in curve.whirl_points] + [n.t for n in pr.weight.nodes]
    if bundle.symbol is not None:
        points += [j.t for j in bundle.symbol.jumps]
    for t in points:
        d, src = pr.delta(t)
        spir.append({"t": _c(t), "delta": d, "source": src})
    ok = lh.holds and np.isfinite(carleson)
    report = {
        "log_holder": {"holds": lh.holds, "min_A_estimate": lh.min_A_estimate, "pairs": lh.n_pairs},
        "carleson_constant": carleson,
        "spirality": spir,
        "symbols_validated": sorted(bundle.symbols),
    }
    return (0 if ok else 1), report


def cmd_bounded(bundle, args, ov):
    rep = check_boundedness(bundle.problem)
    return (0 if rep.bounded else 1), rep.to_dict()


def cmd_fredholm(bundle, args, ov):
    rep = fredholm_sio(_need_symbol(bundle), bundle.problem, margin_warn=args.margin_warn)
    return (0 if rep.fredholm else 1), rep.to_dict()


def cmd_closed_image(bundle, args, ov):
    ok = closed_image(_need_symbol(bundle), bundle.problem)
    return (0 if ok else 1), {"closed_image": ok}


def _write_spectra(out, horns, range_points, ov, title):
    layers = horn_layers(horns, n_c=int(ov.get("levels", 16)), clip=float(ov.get("clip", 4.0)))
    write_spectra_csv(out / "spectra.csv", layers, range_points)
    write_spectra_svg(out / "spectra.svg", layers, range_points, title=title)
    return len(layers)


def cmd_local_spectrum(bundle, args, ov):
    t = complex(ov.get("t", _default_point(bundle)))
    h = local_spectrum(bundle.problem, t)
    n = _write_spectra(args.out, [(t, h)], [], ov, "local spectrum")
    loc = bundle.problem.local(t)
    return 0, {"t": _c(t), "horn": h.to_dict(), "delta_source": loc.delta_source, "paths": n}


def _lambda_grid(points, n, pad=0.5):
    pts = np.asarray(points, dtype=complex)
    x = np.linspace(pts.real.min() - pad, pts.real.max() + pad, n)
    y = np.linspace(pts.imag.min() - pad, pts.imag.max() + pad, n)
    X, Y = np.meshgrid(x, y)
    return (X + 1j * Y).ravel()


def cmd_ess_spectrum(bundle, args, ov):
    a = _need_symbol(bundle)
    cloud = essential_spectrum_cloud(a, bundle.problem)
    anchor = list(cloud.range_points) + [z for _, h in cloud.horns for z in (h.z1, h.z2)]
    grid = _lambda_grid(anchor, args.grid_z)
    ga = essential_spectrum_cloud(a, bundle.problem, grid, mode="analytic")
    report = cloud.to_dict()
    report["grid"] = {"n": args.grid_z, "in_spectrum": int(ga.grid_member.sum())}
    if ov.get("check_grid_mode"):
        gg = essential_spectrum_cloud(a, bundle.problem, grid, mode="grid")
        report["grid"]["modes_agree"] = bool(np.array_equal(gg.grid_member, ga.grid_member))
    rng = np.unique(np.round(cloud.range_points, 12))
    report["paths"] = _write_spectra(args.out, cloud.horns, rng, ov, "essential spectrum")
    return 0, report


def cmd_symbol_det(bundle, args, ov):
    from .symbols import ap_plus_q, fredholm_algebra

    expr = bundle.expr
    if expr is None:
        expr = ap_plus_q(_need_symbol(bundle))
    rep = fredholm_algebra(expr, bundle.problem, n_t=args.grid_t, n_c=int(ov.get("levels", 64)))
    rep["expr"] = repr(expr)
    return (0 if rep["fredholm"] else 1), rep


def cmd_oracle(bundle, args, ov):
    import csv

    from .sections import cluster_compare, sigma_min_sweep

    a = _need_symbol(bundle)
    cloud = essential_spectrum_cloud(a, bundle.problem)
    anchor = list(cloud.range_points) + [z for _, h in cloud.horns for z in (h.z1, h.z2)]
    grid = _lambda_grid(anchor, args.grid_z)
    sweep = sigma_min_sweep(a, grid, n=args.section_n, fft_size=args.fft_size)
    threshold = float(ov.get("threshold", 0.05))
    guard = float(ov.get("guard", 0.1))
    rep = cluster_compare(cloud, sweep, threshold, guard)
    with (args.out / "sweep.csv").open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["re", "im", "sigma_min", "predicted_member"])
        for lam, s, m in zip(sweep.lam, sweep.sigma_min, rep.predicted_member):
            w.writerow([f"{lam.real:.12g}", f"{lam.imag:.12g}", f"{s:.12g}", int(m)])
    rng = np.unique(np.round(cloud.range_points, 12))
    paths = _write_spectra(args.out, cloud.horns, rng, ov, "essential spectrum vs finite sections")
    min_agree = float(ov.get("min_agreement", 0.95))
    report = rep.to_dict()
    report.update({
        "n": args.section_n,
        "fft_size": args.fft_size,
        "threshold": threshold,
        "guard": guard,
        "grid": args.grid_z,
        "failures": [{"lambda": _c(l), "message": m} for l, m in sweep.failures],
        "paths": paths,
    })
    return (0 if rep.agreement_rate >= min_agree else 1), report


HANDLERS = {
    "indices": cmd_indices,
    "validate": cmd_validate,
    "bounded": cmd_bounded,
    "fredholm": cmd_fredholm,
    "closed-image": cmd_closed_image,
    "local-spectrum": cmd_local_spectrum,
    "ess-spectrum": cmd_ess_spectrum,
    "symbol-det": cmd_symbol_det,
    "oracle": cmd_oracle,
}


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_intermixed_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        ov = parse_overrides(args.overrides)
        bundle = load_input(args.input)
    except (InputError, ValueError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    args.out = out
    try:
        status, body = HANDLERS[args.command](bundle, args, ov)
        report = {"command": args.command, "status": status, "result": body}
    except InputError as exc:
        status, report = 2, {"command": args.command, "status": 2, "error": f"input error: {exc}"}
    except PreconditionError as exc:
        status, report = 3, {"command": args.command, "status": 3, "error": f"precondition failed: {exc}"}
    except ConvergenceError as exc:
        status, report = 4, {"command": args.command, "status": 4, "error": f"did not converge: {exc}"}
    report["input"] = Path(args.input).name
    report["config"] = {
        "grid_t": args.grid_t,
        "grid_z": args.grid_z,
        "section_n": args.section_n,
        "fft_size": args.fft_size,
        "seed": args.seed,
        "margin_warn": args.margin_warn,
        "overrides": {k: (_c(v) if isinstance(v, complex) else v) for k, v in sorted(ov.items())},
    }
    dump_json(report, out / "report.json")
    if "error" in report:
        print(report["error"], file=sys.stderr)
    return status


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
