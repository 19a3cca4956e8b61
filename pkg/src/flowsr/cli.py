"""Command-line pipeline: simulate, degrade, super-resolve, evaluate, verify.

Exit codes: 0 on success, 1 on runtime failure, 2 on usage errors.  Every
command is deterministic given its flags and seed, and all file outputs are
written atomically.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys
import tempfile
import time

import numpy as np

from .config import RunConfig, format_config_text, parse_config_text
from .degrade import DegradationConfig, degrade_dataset
from .errors import FlowSRError
from .interp import upsample_dataset
from .metrics import EvalReport, evaluate
from .oracle import build_dense, dense_solve
from .phantom import helix_phantom, poiseuille_phantom, pulsatile_profile
from .solver import SolverConfig, fsr_solve, superresolve_dataset
from .spectral import (
    KernelSpectrum,
    fftn_unitary,
    fold_blocks,
    fold_spectrum,
    gaussian_spectrum,
    ideal_lowpass_spectrum,
    ifftn_unitary,
    unfold_blocks,
)
from .volio import load_dataset, save_dataset
from .volume import ComplexVolume, Grid3

__all__ = ["main"]

ORACLE_GRIDS = [(4, 4, 4), (6, 6, 6), (8, 8, 8), (8, 6, 4)]
ORACLE_FACTORS = [(2, 1, 1), (2, 2, 1), (2, 2, 2)]
ORACLE_KERNELS = ["ideal", "gaussian"]
ORACLE_TAUS = [1e-3, 0.05, 1.0]
ORACLE_TOLERANCE = 1e-8


def _triple(kind, minimum=None):
    def parse(text: str):
        parts = [p for p in text.replace(",", " ").split() if p]
        if len(parts) != 3:
            raise ValueError(f"expected 3 comma-separated values, got {text!r}")
        values = tuple(kind(p) for p in parts)
        if minimum is not None and min(values) < minimum:
            raise ValueError(f"values must be >= {minimum}, got {text!r}")
        return values

    return parse


def _positive_float(text: str) -> float:
    value = float(text)
    if not value > 0:
        raise ValueError(f"must be > 0, got {text!r}")
    return value


def _write_text(path, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".flowsr-", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _build_kernel(hr_grid: Grid3, kind: str, d, fwhm) -> KernelSpectrum:
    if kind == "ideal":
        return ideal_lowpass_spectrum(hr_grid, d)
    if fwhm is None:
        fwhm = tuple(dim / rate for dim, rate in zip(hr_grid.dims, d))
    return gaussian_spectrum(hr_grid, fwhm)


def _make_phantom(rc: RunConfig):
    grid = Grid3(*rc.dims, spacing=rc.spacing)
    profile = pulsatile_profile(rc.vmax, rc.frames)
    kwargs = dict(
        radius_voxels=rc.effective_radius(),
        vmax_per_frame=profile,
        venc=rc.venc,
        axis=rc.axis,
        magnitude_in=rc.magnitude_in,
        magnitude_out=rc.magnitude_out,
    )
    if rc.phantom == "poiseuille":
        return poiseuille_phantom(grid, **kwargs)
    return helix_phantom(grid, **kwargs)


def cmd_simulate(args) -> int:
    rc = RunConfig(
        phantom=args.phantom,
        dims=args.dims,
        frames=args.frames,
        venc=args.venc,
        vmax=args.vmax,
        radius=args.radius,
        axis=args.axis,
        magnitude_in=args.magnitude_in,
        magnitude_out=args.magnitude_out,
        spacing=args.spacing,
        factor=(1, 1, 1),
    )
    ds = _make_phantom(rc)
    save_dataset(ds, args.out)
    print(f"wrote {args.out}: {rc.phantom} phantom, dims {rc.dims}, {rc.frames} frame(s)")
    return 0


def _calibration_text(cal, cfg: DegradationConfig) -> str:
    achieved = "inf" if np.isinf(cal.achieved_psnr_db) else repr(cal.achieved_psnr_db)
    target = "none" if cal.target_psnr_db is None else repr(cal.target_psnr_db)
    return (
        f"sigma = {cal.sigma!r}\n"
        f"achieved_psnr_db = {achieved}\n"
        f"target_psnr_db = {target}\n"
        f"seed = {cfg.rng_seed}\n"
        f"factor = {','.join(str(v) for v in cfg.d)}\n"
        f"kernel = {cfg.kernel}\n"
    )


def cmd_degrade(args) -> int:
    hr = load_dataset(args.infile)
    cfg = DegradationConfig(
        d=args.factor,
        kernel=args.kernel,
        gaussian_fwhm_bins=args.kernel_fwhm,
        noise_psnr_db=args.noise_psnr,
        rng_seed=args.seed,
    )
    lr, cal = degrade_dataset(hr, cfg)
    save_dataset(lr, args.out)
    cal_path = args.calibration_out or args.out + ".cal"
    _write_text(cal_path, _calibration_text(cal, cfg))
    print(f"wrote {args.out}: LR grid {lr.grid.dims}")
    if cal.target_psnr_db is not None:
        print(f"noise sigma {cal.sigma:.6g}, achieved PSNR {cal.achieved_psnr_db:.2f} dB")
    return 0


def _solve_report_csv(reports) -> str:
    lines = ["frame,channel,residual_norm,prior_distance,objective,wall_time_s"]
    for frame, channel, rep in reports:
        lines.append(
            f"{frame},{channel},{rep.residual_norm!r},{rep.prior_distance!r},"
            f"{rep.objective!r},{rep.wall_time_s!r}"
        )
    return "\n".join(lines) + "\n"


def cmd_sr(args) -> int:
    lr = load_dataset(args.infile)
    if args.method in ("trilinear", "tricubic"):
        sr = upsample_dataset(lr, args.factor, args.method)
        save_dataset(sr, args.out)
        print(f"wrote {args.out}: {args.method} upsampling to {sr.grid.dims}")
        return 0
    hr_grid = lr.grid.scaled(args.factor)
    kernel = _build_kernel(hr_grid, args.kernel, args.factor, args.kernel_fwhm)
    cfg = SolverConfig(tau=args.tau, kernel=kernel, d=args.factor, prior=args.prior)
    reports: list = []
    sr = superresolve_dataset(lr, cfg, hr_grid, reports=reports)
    save_dataset(sr, args.out)
    if args.report_out:
        _write_text(args.report_out, _solve_report_csv(reports))
    total = sum(rep.wall_time_s for _, _, rep in reports)
    print(f"wrote {args.out}: fsr tau={args.tau:g} to {sr.grid.dims} ({total:.2f} s of solves)")
    return 0


def _print_eval_summary(report: EvalReport, methods) -> None:
    print(f"{'method':<12}{'mean PSNR (dB)':>16}{'mean MRE (%)':>14}")
    for method in methods:
        print(
            f"{method:<12}{report.mean(method, 'psnr_db'):>16.3f}"
            f"{report.mean(method, 'mre_percent'):>14.3f}"
        )


def cmd_eval(args) -> int:
    sr = load_dataset(args.sr)
    ref = load_dataset(args.ref)
    baseline = load_dataset(args.baseline) if args.baseline else None
    report = evaluate(
        sr,
        ref,
        baseline=baseline,
        mask_threshold=args.mask_threshold,
        sr_method=args.sr_label,
        baseline_method=args.baseline_label,
    )
    _write_text(args.out, report.to_csv())
    methods = [args.sr_label] + ([args.baseline_label] if baseline is not None else [])
    _print_eval_summary(report, methods)
    print(f"wrote {args.out}: {len(report.records)} records")
    return 0


def _broken_spectral_solve(y: ComplexVolume, prior: ComplexVolume, cfg: SolverConfig) -> ComplexVolume:
    # negative-control solver for oracle-check: drops the d factor in the
    # per-bin denominator, the constant the derivation pins down
    folded = fold_spectrum(cfg.kernel, cfg.d)
    tiled = np.tile(fftn_unitary(y.data), cfg.d) / np.sqrt(np.prod(cfg.d))
    k_spec = np.conj(cfg.kernel.values) * tiled + 2 * cfg.tau * fftn_unitary(prior.data)
    k_blocks = fold_blocks(k_spec, cfg.d)
    reduced = (folded.blocks * k_blocks).sum(axis=(0, 1, 2))
    weights = reduced / (2 * cfg.tau + folded.gram)  # correct constant is 2*tau*d
    x_blocks = (k_blocks - np.conj(folded.blocks) * weights) / (2 * cfg.tau)
    return ComplexVolume(cfg.hr_grid, ifftn_unitary(unfold_blocks(x_blocks)))


def _oracle_cases(args):
    if args.dims is not None:
        return [(args.dims, args.factor, args.kernel, [args.tau])]
    cases = []
    for dims in ORACLE_GRIDS:
        for factor in ORACLE_FACTORS:
            for kernel in ORACLE_KERNELS:
                cases.append((dims, factor, kernel, ORACLE_TAUS))
    return cases


def cmd_oracle_check(args) -> int:
    rng = np.random.default_rng(args.seed)
    t0 = time.perf_counter()
    worst = 0.0
    failed = 0
    total = 0
    for dims, factor, kernel_kind, taus in _oracle_cases(args):
        hr = Grid3(*dims)
        lr = hr.decimated(factor)
        kernel = _build_kernel(hr, kernel_kind, factor, None)
        y = ComplexVolume(lr, rng.standard_normal(lr.dims) + 1j * rng.standard_normal(lr.dims))
        prior = ComplexVolume(hr, rng.standard_normal(hr.dims) + 1j * rng.standard_normal(hr.dims))
        ops = None
        for tau in taus:
            cfg = SolverConfig(tau=tau, kernel=kernel, d=factor)
            if ops is None:
                ops = build_dense(hr, cfg)
            x_ref = dense_solve(y, prior, ops, tau)
            if args.break_constant:
                x_fast = _broken_spectral_solve(y, prior, cfg)
            else:
                x_fast, _ = fsr_solve(y, cfg, prior=prior)
            rel = float(
                np.linalg.norm(x_fast.data - x_ref.data) / np.linalg.norm(x_ref.data)
            )
            worst = max(worst, rel)
            ok = rel <= args.tolerance
            failed += 0 if ok else 1
            total += 1
            status = "ok" if ok else "FAIL"
            print(
                f"[{status}] dims={dims} d={factor} kernel={kernel_kind:<8} "
                f"tau={tau:<8g} rel_err={rel:.3e}"
            )
    elapsed = time.perf_counter() - t0
    print(
        f"{total} configs in {elapsed:.1f} s; max relative error {worst:.3e} "
        f"(tolerance {args.tolerance:g})"
    )
    if failed:
        print(f"FAIL: {failed} config(s) above tolerance", file=sys.stderr)
        return 1
    print("PASS: closed-form solver matches the dense oracle")
    return 0


def _apply_overrides(rc: RunConfig, args) -> RunConfig:
    overrides = {}
    for key in (
        "phantom",
        "dims",
        "frames",
        "venc",
        "vmax",
        "radius",
        "axis",
        "factor",
        "kernel",
        "kernel_fwhm",
        "seed",
        "tau",
        "prior",
        "baseline",
        "mask_threshold",
    ):
        value = getattr(args, key, None)
        if value is not None:
            overrides[key] = value
    if args.noise_psnr is not None:
        overrides["noise_psnr"] = None if args.noise_psnr <= 0 else args.noise_psnr
    return dataclasses.replace(rc, **overrides)


def cmd_pipeline(args) -> int:
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            rc = parse_config_text(fh.read())
    else:
        rc = RunConfig()
    rc = _apply_overrides(rc, args)

    out_dir = args.out_dir
    os.makedirs(out_dir, exist_ok=True)
    path = lambda name: os.path.join(out_dir, name)
    t0 = time.perf_counter()

    hr = _make_phantom(rc)
    save_dataset(hr, path("hr.flw4"))

    dcfg = DegradationConfig(
        d=rc.factor,
        kernel=rc.kernel,
        gaussian_fwhm_bins=rc.kernel_fwhm,
        noise_psnr_db=rc.noise_psnr,
        rng_seed=rc.seed,
    )
    lr, cal = degrade_dataset(hr, dcfg)
    save_dataset(lr, path("lr.flw4"))
    _write_text(path("lr.flw4.cal"), _calibration_text(cal, dcfg))

    hr_grid = lr.grid.scaled(rc.factor)
    kernel = _build_kernel(hr_grid, rc.kernel, rc.factor, rc.kernel_fwhm)
    scfg = SolverConfig(tau=rc.tau, kernel=kernel, d=rc.factor, prior=rc.prior)
    reports: list = []
    sr_fsr = superresolve_dataset(lr, scfg, hr_grid, reports=reports)
    save_dataset(sr_fsr, path("sr_fsr.flw4"))
    _write_text(path("solve_reports.csv"), _solve_report_csv(reports))

    sr_base = upsample_dataset(lr, rc.factor, rc.baseline)
    save_dataset(sr_base, path(f"sr_{rc.baseline}.flw4"))

    report = evaluate(
        sr_fsr,
        hr,
        baseline=sr_base,
        mask_threshold=rc.mask_threshold,
        sr_method="fsr",
        baseline_method=rc.baseline,
    )
    _write_text(path("metrics.csv"), report.to_csv())
    _write_text(path("effective.cfg"), format_config_text(rc))

    frames = range(len(hr.frames))
    psnr_wins = all(
        report.values("fsr", "psnr_db", ch)[f] > report.values(rc.baseline, "psnr_db", ch)[f]
        for f in frames
        for ch in ("u", "v", "w")
    )
    mre_wins = all(
        report.values("fsr", "mre_percent", "all")[f]
        < report.values(rc.baseline, "mre_percent", "all")[f]
        for f in frames
    )
    elapsed = time.perf_counter() - t0

    lines = [
        f"phantom={rc.phantom} dims={rc.dims} factor={rc.factor} "
        f"noise_psnr={rc.noise_psnr} seed={rc.seed} tau={rc.tau:g}",
        f"{'method':<12}{'mean PSNR (dB)':>16}{'mean MRE (%)':>14}",
    ]
    for method in ("fsr", rc.baseline):
        lines.append(
            f"{method:<12}{report.mean(method, 'psnr_db'):>16.3f}"
            f"{report.mean(method, 'mre_percent'):>14.3f}"
        )
    lines.append(f"fsr beats {rc.baseline} on every frame/channel PSNR: {'yes' if psnr_wins else 'NO'}")
    lines.append(f"fsr beats {rc.baseline} on every frame MRE: {'yes' if mre_wins else 'NO'}")
    lines.append(f"elapsed: {elapsed:.1f} s")
    summary = "\n".join(lines) + "\n"
    _write_text(path("summary.txt"), summary)
    print(summary, end="")
    print(f"artifacts in {out_dir}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="flowsr",
        description="Super-resolve and denoise volumetric velocity fields "
        "with a closed-form Fourier-domain solver.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    p = sub.add_parser("simulate", help="generate an analytic phantom dataset")
    p.add_argument("--phantom", choices=("poiseuille", "helix"), default="poiseuille")
    p.add_argument("--dims", type=_triple(int, 1), default=(64, 64, 64), metavar="M,N,S")
    p.add_argument("--frames", type=int, default=5)
    p.add_argument("--venc", type=_positive_float, default=150.0, help="cm/s")
    p.add_argument("--vmax", type=_positive_float, default=120.0, help="peak speed, cm/s")
    p.add_argument("--radius", type=float, default=0.0, help="tube radius in voxels (0 = auto)")
    p.add_argument("--axis", choices=("x", "y", "z"), default="z")
    p.add_argument("--magnitude-in", type=float, default=1.0)
    p.add_argument("--magnitude-out", type=float, default=0.0)
    p.add_argument("--spacing", type=_triple(float), default=(1.0, 1.0, 1.0), metavar="X,Y,Z")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("degrade", help="simulate the low-resolution noisy acquisition")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--factor", type=_triple(int, 1), required=True, metavar="DR,DC,DS")
    p.add_argument("--noise-psnr", type=float, default=None, help="target PSNR in dB (omit for noiseless)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--kernel", choices=("ideal", "gaussian"), default="ideal")
    p.add_argument("--kernel-fwhm", type=_triple(float), default=None, metavar="FX,FY,FZ")
    p.add_argument("--calibration-out", default=None, help="default: <out>.cal")
    p.set_defaults(func=cmd_degrade)

    p = sub.add_parser("sr", help="super-resolve a low-resolution dataset")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--factor", type=_triple(int, 1), required=True, metavar="DR,DC,DS")
    p.add_argument("--method", choices=("fsr", "trilinear", "tricubic"), default="fsr")
    p.add_argument("--tau", type=_positive_float, default=0.01)
    p.add_argument("--prior", choices=("trilinear", "zero-fill"), default="trilinear")
    p.add_argument("--kernel", choices=("ideal", "gaussian"), default="ideal")
    p.add_argument("--kernel-fwhm", type=_triple(float), default=None, metavar="FX,FY,FZ")
    p.add_argument("--report-out", default=None, help="per-solve diagnostics CSV")
    p.set_defaults(func=cmd_sr)

    p = sub.add_parser("eval", help="score reconstructions against a reference")
    p.add_argument("--sr", required=True)
    p.add_argument("--ref", required=True)
    p.add_argument("--baseline", default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--mask-threshold", type=float, default=0.1)
    p.add_argument("--sr-label", default="fsr")
    p.add_argument("--baseline-label", default="trilinear")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser(
        "oracle-check",
        help="verify the closed-form solver against the dense brute-force solution",
    )
    p.add_argument("--dims", type=_triple(int, 1), default=None, metavar="M,N,S")
    p.add_argument("--factor", type=_triple(int, 1), default=(2, 2, 2), metavar="DR,DC,DS")
    p.add_argument("--tau", type=_positive_float, default=0.05)
    p.add_argument("--kernel", choices=("ideal", "gaussian"), default="ideal")
    p.add_argument("--tolerance", type=_positive_float, default=ORACLE_TOLERANCE)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--break-constant", action="store_true", help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_oracle_check)

    p = sub.add_parser("pipeline", help="simulate, degrade, super-resolve and evaluate in one run")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--config", default=None, help="key=value run configuration file")
    p.add_argument("--phantom", choices=("poiseuille", "helix"), default=None)
    p.add_argument("--dims", type=_triple(int, 1), default=None, metavar="M,N,S")
    p.add_argument("--frames", type=int, default=None)
    p.add_argument("--venc", type=_positive_float, default=None)
    p.add_argument("--vmax", type=_positive_float, default=None)
    p.add_argument("--radius", type=float, default=None)
    p.add_argument("--axis", choices=("x", "y", "z"), default=None)
    p.add_argument("--factor", type=_triple(int, 1), default=None, metavar="DR,DC,DS")
    p.add_argument("--kernel", choices=("ideal", "gaussian"), default=None)
    p.add_argument("--kernel-fwhm", type=_triple(float), default=None, metavar="FX,FY,FZ")
    p.add_argument("--noise-psnr", type=float, default=None, help="<= 0 disables noise")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--tau", type=_positive_float, default=None)
    p.add_argument("--prior", choices=("trilinear", "zero-fill"), default=None)
    p.add_argument("--baseline", choices=("trilinear", "tricubic"), default=None)
    p.add_argument("--mask-threshold", type=float, default=None)
    p.set_defaults(func=cmd_pipeline)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FlowSRError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
