"""``rmf`` command-line interface.

Exit codes: 0 success, 2 usage error, 3 numerical or singularity error,
4 I/O error. Output files never contain timestamps and floats are written
with 12 significant digits, so reruns are byte-identical.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import io as rio
from .classify import classify_curve, is_rectifying_position
from .core import DEFAULT_TOL, SampledCurve, ToleranceConfig
from .curves import DEFAULT_RANGES, ReferenceHelix, builtin, helix
from .errors import FrameDegeneracyError, NumericalError, RMFError, SingularityError
from .framing import (
    CurvatureField,
    Frame,
    bishop_curvatures,
    bishop_initial_frame,
    frenet_as_rmf,
    frenet_curvatures,
    frenet_frames,
    rm_curvatures,
    rmf_double_reflection,
    rmf_ode,
)
from .rectifying import (
    RectifyingSpec,
    constancy_verdict,
    construct_type_curve,
    derive_free_coefficient,
    helix_axis,
    relative_variation,
    verify_derivative_rectifying,
)
from .svg import PROJECTIONS, write_svg

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4
DEFAULT_SAMPLES = 1001


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# argument plumbing


def _parse_range(text):
    if text is None:
        return None
    a, sep, b = text.partition(":")
    try:
        lo, hi = float(a), float(b)
    except ValueError:
        raise UsageError(f"--range expects A:B, got {text!r}") from None
    if not sep or not lo < hi:
        raise UsageError(f"--range needs A < B, got {text!r}")
    return lo, hi


def _parse_floats(text, what):
    if text is None:
        return None
    if text.strip() == "":
        return ()
    try:
        return tuple(float(x) for x in text.split(","))
    except ValueError:
        raise UsageError(f"{what} expects comma-separated numbers, got {text!r}") from None


def tolerance_from_env(env=None) -> ToleranceConfig:
    env = os.environ if env is None else env
    raw = env.get("RMF_TOL")
    if not raw:
        return DEFAULT_TOL
    try:
        return replace(DEFAULT_TOL, residual_tol=float(raw))
    except ValueError as exc:
        raise UsageError(f"RMF_TOL: {exc}") from None


def load_curve(args):
    """Return ``(curve, grid)`` from ``--curve``/``--input`` plus grid options."""
    rng = _parse_range(args.range)
    if bool(args.curve) == bool(args.input):
        raise UsageError("give exactly one of --curve NAME or --input PATH")
    if args.input:
        curve = rio.read_curve_csv(args.input)
        if args.dim is not None and curve.dim != args.dim:
            raise UsageError(f"{args.input}: curve has dimension {curve.dim}, --dim says {args.dim}")
        s = curve.s
        if rng is not None:
            s = s[(s >= rng[0]) & (s <= rng[1])]
            if s.size < 4:
                raise UsageError("fewer than 4 samples inside --range")
            keep = np.isin(curve.s, s)
            curve = SampledCurve(curve.s[keep], curve.points[keep], curve.name)
        if args.samples is not None and args.samples != curve.s.size:
            raise UsageError("--samples applies to builtin curves; sampled input keeps its own grid")
        return curve, curve.s
    try:
        curve = builtin(args.curve, rng)
    except KeyError as exc:
        raise UsageError(exc.args[0]) from None
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.dim is not None:
        if args.dim < curve.dim:
            raise UsageError(f"builtin {args.curve} lives in R^{curve.dim}; --dim {args.dim} is too small")
        if args.dim > curve.dim:
            curve = curve.embedded(args.dim)
    n = DEFAULT_SAMPLES if args.samples is None else args.samples
    if n < 4:
        raise UsageError("--samples must be at least 4")
    return curve, np.linspace(curve.s_min, curve.s_max, n)


def _out_paths(out, suffixes):
    """Main output path plus sibling paths ``<stem>.<suffix>``."""
    p = Path(out)
    stem = p.with_suffix("") if p.suffix else p
    return p, [Path(f"{stem}.{sfx}") for sfx in suffixes]


def _emit(text, out):
    if out is None:
        sys.stdout.write(text)
    else:
        rio._write_text(out, text)


# ---------------------------------------------------------------------------
# frames


def _bishop_start(curve, s, cfg):
    """Frenet-aligned initial frame for space curves, or None (no Frenet data)."""
    if curve.dim != 3:
        return None
    try:
        return bishop_initial_frame(curve, float(s[0]), 0.0, cfg)
    except FrameDegeneracyError:
        return None


def _rm_frames(curve, s, method, cfg):
    """RM frame field and its curvatures for ``rmf-dr`` / ``rmf-ode``.

    Space curves start from their Frenet frame (Bishop frame with theta = 0
    at the first sample) when it exists.
    """
    init = _bishop_start(curve, s, cfg)
    if method == "rmf-ode":
        if init is not None:
            curv = bishop_curvatures(curve, s, cfg)
        else:
            dr = rmf_double_reflection(curve, s, cfg=cfg)
            curv = rm_curvatures(dr, cfg, method="auto")
            init = dr[0]
        return rmf_ode(curv, init, cfg), curv
    field = rmf_double_reflection(curve, s, init, cfg)
    return field, rm_curvatures(field, cfg, method="auto")


def cmd_frame(args, cfg):
    curve, s = load_curve(args)
    if args.method == "frenet":
        field = frenet_frames(curve, s, cfg)
        curv = None
    else:
        field, curv = _rm_frames(curve, s, args.method, cfg)
    text = rio.dumps(rio.frame_field_records(field))
    if args.out is None:
        _emit(text, None)
        return
    main, (kpath,) = _out_paths(args.out, ["curvatures.csv"])
    _emit(text, main)
    if curv is not None:
        rio.write_curvature_csv(kpath, CurvatureField(curv.s, curv.k, curv.kappa, curv.tau, curv.theta))


def cmd_curvature(args, cfg):
    curve, s = load_curve(args)
    if args.method == "frenet":
        if curve.dim != 3:
            raise UsageError("--method frenet curvatures are defined for n = 3")
        curv = bishop_curvatures(curve, s, cfg)
    elif args.method == "rmf-ode":
        field, _ = _rm_frames(curve, s, "rmf-ode", cfg)
        curv = rm_curvatures(field, cfg, method="fd")
    else:
        _, curv = _rm_frames(curve, s, "rmf-dr", cfg)
    _emit(rio.curvature_csv(curv), args.out)


# ---------------------------------------------------------------------------
# construct


def _spec_from_args(args, n):
    if args.spec:
        spec = RectifyingSpec.from_json(Path(args.spec).read_text(encoding="utf-8"))
        if spec.n != n:
            raise UsageError(f"spec is for n={spec.n}, curve lives in R^{n}")
        return spec
    if args.type is None:
        raise UsageError("construct needs --type J (or --spec PATH)")
    consts = _parse_floats(args.constants, "--constants")
    if consts is None:
        consts = (1.0,) * (n - 2)
    try:
        return RectifyingSpec(n, args.type, consts)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def construct_pipeline(curve, s, spec, method, cfg, free_const=None):
    """Basis, coefficients, constructed curve and report for one spec."""
    if method == "frenet":
        field, curv = frenet_as_rmf(curve, s, cfg)
    else:
        field, curv = _rm_frames(curve, s, method, cfg)
    if free_const is not None:
        full = spec.with_constant_free(free_const, len(field))
    else:
        full = derive_free_coefficient(curv, spec, cfg)
    psi = construct_type_curve(field, full)
    free = np.asarray(full.free_coeff)
    report = {
        "spec": {"n": spec.n, "type_index": spec.type_index, "constants": list(spec.constants)},
        "basis": method,
        "free_coefficient": {
            "derived": free_const is None,
            "min": float(free.min()),
            "max": float(free.max()),
            "relative_variation": relative_variation(free),
            "constancy": constancy_verdict(free),
        },
        "derivative_check": verify_derivative_rectifying(field, full, cfg).to_dict(),
    }
    if report["free_coefficient"]["constancy"] == "constant" and any(spec.constants):
        report["helix_axis"] = helix_axis(field, curv, full, cfg).to_dict()
    if spec.n == 3 and np.any(psi.points != 0):
        try:
            entry = is_rectifying_position(psi, cfg)
            report["rectifying_position"] = entry.to_dict()
        except NumericalError as exc:
            report["rectifying_position"] = {"error": str(exc)}
    return field, full, psi, report


def cmd_construct(args, cfg):
    curve, s = load_curve(args)
    spec = _spec_from_args(args, curve.dim)
    method = args.method or "rmf-dr"
    _, full, psi, report = construct_pipeline(curve, s, spec, method, cfg, args.free_const)
    if args.out is None:
        _emit(rio.dumps(report), None)
        return
    main, (rpath, cpath) = _out_paths(args.out, ["report.json", "coeffs.csv"])
    rio.write_curve_csv(main, psi)
    rio.write_json(rpath, report)
    coeffs = full.coefficients(len(s))
    header = ["s"] + [f"c{j + 1}" for j in range(coeffs.shape[1])]
    rio._write_text(cpath, rio._csv_text(header, np.column_stack([s, coeffs])))


# ---------------------------------------------------------------------------
# classify and export


def cmd_classify(args, cfg):
    curve, s = load_curve(args)
    report = classify_curve(curve, cfg, s)
    _emit(rio.dumps(report.to_dict()), args.out)


def cmd_export(args, cfg):
    fmt = args.format or "svg"
    if args.project not in PROJECTIONS:
        raise UsageError(f"unknown projection {args.project!r}; choose from {', '.join(PROJECTIONS)}")
    if len(args.inputs) > 1:
        if args.curve:
            raise UsageError("give exactly one of --curve NAME or --input PATH")
        curves = [rio.read_curve_csv(p) for p in args.inputs]
    else:
        curve, s = load_curve(args)
        if not isinstance(curve, SampledCurve):
            curve = SampledCurve(s, curve.position(s), curve.name)
        curves = [curve]
    if fmt == "svg":
        if any(c.dim < 2 or max(PROJECTIONS[args.project]) >= c.dim for c in curves):
            raise UsageError(f"projection {args.project} needs more coordinates than the curve has")
        from .svg import polylines_svg

        _emit(polylines_svg([c.points for c in curves], args.project), args.out)
    elif fmt == "csv":
        if len(curves) != 1:
            raise UsageError("csv export takes one curve")
        _emit(rio.curve_csv(curves[0].s, curves[0].points), args.out)
    else:
        recs = [{"name": c.name, "s": c.s, "points": c.points} for c in curves]
        _emit(rio.dumps(recs), args.out)


# ---------------------------------------------------------------------------
# worked helix example


def _fd_kappa_tau(s, cfg):
    """Frenet curvature and torsion of the helix from finite differences only."""
    lo, hi = float(np.min(s)), float(np.max(s))
    fd = helix(domain=(lo - 1.0, hi + 1.0)).without_derivatives()
    kappa, tau, _ = frenet_curvatures(fd, s, cfg)
    return kappa, tau


def _guarded_grid(lo, hi, n):
    if n < 4:
        raise UsageError("--samples must be at least 4")
    return np.linspace(lo, hi, n)


def _helix_beta(s, type_index, cfg):
    """Type-j curve with c = 1 on the helix Bishop basis (closed-form curvatures)."""
    P = ReferenceHelix
    curv = CurvatureField.from_function(P.bishop_curvatures, s)
    s0 = float(s[0])
    init = Frame(s0, np.array([P.T([s0])[0], P.N1([s0])[0], P.N2([s0])[0]]))
    field = rmf_ode(curv, init, cfg)
    spec = derive_free_coefficient(curv, RectifyingSpec(3, type_index, (1.0,)), cfg)
    psi = construct_type_curve(field, spec)
    return field, spec, psi


def cmd_demo_helix(args, cfg):
    P = ReferenceHelix
    rng = _parse_range(args.range) or (1e-6, 120.0)
    lo, hi = rng
    # the type-1 coefficient blows up where k_1 = kappa cos(7s/625) vanishes
    z = P.first_k1_zero
    period = 625.0 * np.pi / 7.0
    zeros = [z + k * period for k in range(int(np.floor((lo - z) / period)), int(np.ceil((hi - z) / period)) + 1)]
    inside = [x for x in zeros if lo <= x <= hi]
    if inside:
        where = ", ".join(f"{x:.12g}" for x in inside)
        raise SingularityError(
            f"requested range [{lo:.12g}, {hi:.12g}] contains a zero of k_1 at s = {where} (625*pi/14 + k*625*pi/7)",
            inside,
        )
    n = args.samples or 12001
    at = _parse_floats(args.at, "--at") if args.at else tuple(np.linspace(0.0 if lo < 1.0 else lo, hi, 5))
    at_arr = np.asarray(at, dtype=float)

    exact = helix(domain=(min(lo, float(at_arr.min())) - 1.0, max(hi, float(at_arr.max())) + 1.0))
    k_an, t_an, _ = frenet_curvatures(exact, at_arr, cfg)
    k_fd, t_fd = _fd_kappa_tau(at_arr, cfg)

    s1 = _guarded_grid(lo, hi, n)
    _, spec1, beta1 = _helix_beta(s1, 1, cfg)
    lo2 = max(lo, 1.0)
    if lo2 >= hi:
        raise UsageError("type-2 curve needs a range reaching past s = 1")
    s2 = _guarded_grid(lo2, hi, n)
    _, spec2, beta2 = _helix_beta(s2, 2, cfg)

    samples = []
    for i, sv in enumerate(at_arr):
        samples.append(
            {
                "s": sv,
                "theta": float(P.theta(sv)),
                "k1": float(P.k1(sv)),
                "k2": float(P.k2(sv)),
                "kappa_analytic": k_an[i],
                "tau_analytic": t_an[i],
                "kappa_fd": k_fd[i],
                "tau_fd": t_fd[i],
            }
        )
    report = {
        "kappa_expected": P.kappa,
        "tau_expected": P.tau,
        "kappa_error_analytic": float(np.abs(k_an - P.kappa).max()),
        "tau_error_analytic": float(np.abs(t_an - P.tau).max()),
        "kappa_error_fd": float(np.abs(k_fd - P.kappa).max()),
        "tau_error_fd": float(np.abs(t_fd - P.tau).max()),
        "fd_step": cfg.fd_step,
        "samples": samples,
        "beta1": {
            "range": [float(s1[0]), float(s1[-1])],
            "samples": int(s1.size),
            "lambda_error_vs_minus_tan": float(np.abs(spec1.free_coeff + np.tan(P.theta(s1))).max()),
            "first_point": beta1.points[0],
        },
        "beta2": {
            "range": [float(s2[0]), float(s2[-1])],
            "samples": int(s2.size),
            "mu_error_vs_minus_cot": float(np.abs(spec2.free_coeff + 1.0 / np.tan(P.theta(s2))).max()),
            "first_point": beta2.points[0],
        },
        "k1_first_zero": z,
    }

    lines = [
        f"kappa = {rio.fmt(report['kappa_expected'])} (24/625)",
        f"tau   = {rio.fmt(report['tau_expected'])} (7/625)",
        f"max |kappa - 24/625|: analytic {rio.fmt(report['kappa_error_analytic'])}, "
        f"finite differences {rio.fmt(report['kappa_error_fd'])}",
        f"max |tau - 7/625|:    analytic {rio.fmt(report['tau_error_analytic'])}, "
        f"finite differences {rio.fmt(report['tau_error_fd'])}",
        "s, theta, k1, k2, kappa, tau",
    ]
    for row in samples:
        lines.append(
            ", ".join(rio.fmt(row[k]) for k in ("s", "theta", "k1", "k2", "kappa_analytic", "tau_analytic"))
        )
    lines.append(f"beta1: {s1.size} samples on [{rio.fmt(s1[0])}, {rio.fmt(s1[-1])}]")
    lines.append(f"beta2: {s2.size} samples on [{rio.fmt(s2[0])}, {rio.fmt(s2[-1])}]")

    outdir = Path(args.out or "helix-demo")
    outdir.mkdir(parents=True, exist_ok=True)
    rio.write_curve_csv(outdir / "beta1.csv", beta1)
    rio.write_curve_csv(outdir / "beta2.csv", beta2)
    write_svg(outdir / "beta1.svg", [beta1.points], args.project)
    write_svg(outdir / "beta2.svg", [beta2.points], args.project)
    rio.write_json(outdir / "report.json", report)
    lines.append(f"wrote beta1.csv, beta2.csv, beta1.svg, beta2.svg, report.json to {outdir}")
    sys.stdout.write("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------


COMMANDS = {
    "frame": cmd_frame,
    "curvature": cmd_curvature,
    "construct": cmd_construct,
    "classify": cmd_classify,
    "demo-helix": cmd_demo_helix,
    "export": cmd_export,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="rmf",
        description="Rotation-minimizing frames, rectifying-type curves and curve classification.",
        epilog="Builtin curves: "
        + ", ".join(DEFAULT_RANGES)
        + " (circle:R and great-circle:R take a radius). Env RMF_TOL overrides residual_tol. "
        "Ranges starting with a minus sign need the --range=A:B form.",
    )
    ap.add_argument("command", choices=sorted(COMMANDS))
    src = ap.add_argument_group("curve")
    src.add_argument("--curve", metavar="NAME[:PARAM]", help="builtin curve")
    src.add_argument("--input", metavar="PATH", action="append", help="sampled-curve CSV (s,x1,...,xn)")
    src.add_argument("--dim", type=int, help="ambient dimension (builtins are padded with zeros)")
    src.add_argument("--range", metavar="A:B", help="parameter range")
    src.add_argument("--samples", type=int, help=f"grid size for builtin curves (default {DEFAULT_SAMPLES})")
    ap.add_argument("--method", choices=["frenet", "rmf-dr", "rmf-ode"], help="framing method (default rmf-dr)")
    ap.add_argument("--type", type=int, metavar="J", help="rectifying type: slot of the free coefficient")
    ap.add_argument("--constants", metavar="C1,C2,...", help="constant coefficients of the other slots")
    ap.add_argument("--free-const", type=float, metavar="C", help="force the free coefficient to the constant C")
    ap.add_argument("--spec", metavar="PATH", help="RectifyingSpec JSON {n, type_index, constants}")
    ap.add_argument("--at", metavar="S1,S2,...", help="demo-helix report samples")
    ap.add_argument("--format", choices=["csv", "json", "svg"], help="export format (default svg)")
    ap.add_argument("--project", default="xy", help="SVG projection: xy, xz or yz")
    ap.add_argument("--out", metavar="PATH", help="output file (directory for demo-helix)")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    args.inputs = args.input or []
    if len(args.inputs) > 1 and args.command != "export":
        print("rmf: error: only export accepts several --input files", file=sys.stderr)
        return EXIT_USAGE
    args.input = args.inputs[0] if args.inputs else None
    try:
        if args.method is None and args.command in ("frame", "curvature"):
            args.method = "rmf-dr"
        if args.command == "demo-helix" and args.project not in PROJECTIONS:
            raise UsageError(f"unknown projection {args.project!r}; choose from {', '.join(PROJECTIONS)}")
        cfg = tolerance_from_env()
        COMMANDS[args.command](args, cfg)
    except UsageError as exc:
        print(f"rmf: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as exc:
        print(f"rmf: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (FileNotFoundError, PermissionError, IsADirectoryError, OSError) as exc:
        print(f"rmf: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, RMFError) as exc:
        print(f"rmf: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
