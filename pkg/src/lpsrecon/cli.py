"""Command-line interface.

Subcommands:
    phantom gen   generate a synthetic sequence and write frame files
    mask gen      generate a variable-density sampling mask
    recon         reconstruct one volume from a simulated acquisition
    recon-seq     reconstruct a whole sequence, threading priors
    sweep         run the full solver x rate x seed grid from a config
    eval          PSNR between two volume files

Exit codes: 0 success, 1 runtime failure (diagnostic on stderr), 2 usage
error.
"""

from __future__ import annotations

import argparse
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from .core import DynamicVolume, Prior
from .harness import (
    ExperimentSpec,
    SolverOptions,
    build_solver_config,
    parse_config,
    run_sweep,
)
from .io import load_mask, load_volume, save_mask, save_volume
from .operators import acquire, extract_support, make_mask, svd
from .phantom import generate, psnr
from .solvers import solve_ls, solve_priori_ls, solve_sequence
from .wavelets import wavelet_forward

__all__ = ["main"]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lpsrecon",
        description="Low-rank plus sparse reconstruction of dynamic volumes.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_phantom = sub.add_parser("phantom", help="phantom utilities")
    phantom_sub = p_phantom.add_subparsers(dest="subcommand", required=True)
    p_pg = phantom_sub.add_parser("gen", help="generate a phantom sequence")
    p_pg.add_argument("--config", help="config file with a [phantom] section")
    p_pg.add_argument("--out", required=True, help="output directory")
    p_pg.add_argument("--seed", type=int, help="override the phantom seed")
    p_pg.add_argument("--frames", type=int, help="override the frame count")

    p_mask = sub.add_parser("mask", help="mask utilities")
    mask_sub = p_mask.add_subparsers(dest="subcommand", required=True)
    p_mg = mask_sub.add_parser("gen", help="generate a variable-density mask")
    p_mg.add_argument("--nx", type=int, required=True)
    p_mg.add_argument("--ny", type=int, required=True)
    p_mg.add_argument("--rate", type=float, required=True)
    p_mg.add_argument("--falloff", type=float, default=2.0)
    p_mg.add_argument("--seed", type=int, default=0)
    p_mg.add_argument("--out", required=True, help="output .lpsm file")

    p_recon = sub.add_parser("recon", help="reconstruct a single volume")
    p_recon.add_argument("--input", required=True, help="ground-truth volume file")
    p_recon.add_argument("--mask", required=True, help="sampling mask file")
    p_recon.add_argument("--out", required=True, help="output basename (writes .x/.l/.s)")
    p_recon.add_argument("--config", help="config file for solver settings")
    p_recon.add_argument("--prior-l", help="previous frame's L volume file")
    p_recon.add_argument("--prior-s", help="previous frame's S volume file")
    p_recon.add_argument("--reference", help="reference volume for PSNR")

    p_seq = sub.add_parser("recon-seq", help="reconstruct a sequence of volumes")
    p_seq.add_argument("--frames", required=True, help="directory of frame*.x files")
    p_seq.add_argument("--out", required=True, help="output directory")
    p_seq.add_argument("--config", help="config file")
    p_seq.add_argument("--solver", choices=("ls", "priori-ls"), default="priori-ls")
    p_seq.add_argument("--rate", type=float, help="sampling rate for frames >= 2")
    p_seq.add_argument("--first-rate", type=float, help="sampling rate for frame 1")
    p_seq.add_argument("--mask-seed", type=int, default=0)

    p_sweep = sub.add_parser("sweep", help="run the full experiment grid")
    p_sweep.add_argument("--config", required=True, help="config file")
    p_sweep.add_argument("--out", help="override the output directory")
    p_sweep.add_argument("--n-seeds", type=int, help="override the seed count")

    p_eval = sub.add_parser("eval", help="PSNR between two volume files")
    p_eval.add_argument("reference")
    p_eval.add_argument("estimate")

    return parser


def _load_options(config_path):
    if config_path is None:
        return ExperimentSpec(), SolverOptions(), SolverOptions()
    return parse_config(config_path)


def _write_components(out_base: Path, dims, l_mat, s_mat) -> None:
    estimate = DynamicVolume(l_mat + s_mat, dims)
    save_volume(out_base.with_suffix(".x"), estimate)
    save_volume(out_base.with_suffix(".l"), DynamicVolume(l_mat, dims))
    save_volume(out_base.with_suffix(".s"), DynamicVolume(s_mat, dims))


def _cmd_phantom_gen(args) -> int:
    experiment, _, _ = _load_options(args.config)
    spec = experiment.phantom
    if args.seed is not None:
        spec = replace(spec, seed=args.seed)
    if args.frames is not None:
        spec = replace(spec, n_frames=args.frames)
    sequence = generate(spec)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for t in range(spec.n_frames):
        base = out / f"frame{t + 1:04d}"
        save_volume(base.with_suffix(".x"), sequence.frames[t])
        save_volume(base.with_suffix(".l"), sequence.l_true[t])
        save_volume(base.with_suffix(".s"), sequence.s_true[t])
    print(f"wrote {spec.n_frames} frames to {out}")
    return 0


def _cmd_mask_gen(args) -> int:
    mask = make_mask(args.nx, args.ny, args.rate, args.falloff, args.seed)
    save_mask(args.out, mask)
    print(f"wrote mask {args.out}: {mask.m} of {mask.pattern.size} samples "
          f"(rate {mask.rate:.4f})")
    return 0


def _metrics_line(frame: int, result, reference, dims) -> str:
    estimate = DynamicVolume(result.estimate(), dims)
    p = psnr(reference, estimate) if reference is not None else float("nan")
    p_txt = "" if reference is None else f",{p:.6f}"
    return (
        f"{frame},{result.iterations},{str(result.converged).lower()},"
        f"{result.data_residual:.6e}{p_txt}"
    )


def _cmd_recon(args, parser) -> int:
    if (args.prior_l is None) != (args.prior_s is None):
        parser.error("--prior-l and --prior-s must be given together")
    volume = load_volume(args.input)
    mask = load_mask(args.mask)
    if mask.pattern.shape != volume.dims[:2]:
        raise ValueError(
            f"mask grid {mask.pattern.shape} does not match volume dims {volume.dims}"
        )
    _, ls_opts, priori_opts = _load_options(args.config)
    y = acquire(volume, mask)
    if args.prior_l is not None:
        prev_l = load_volume(args.prior_l)
        prev_s = load_volume(args.prior_s)
        opts = priori_opts
        cfg = build_solver_config(y, opts)
        prior = Prior(
            sigma_prev=svd(prev_l.data).sigma,
            support_prev=extract_support(wavelet_forward(prev_s), cfg.support_eps),
        )
        result = solve_priori_ls(y, prior, cfg)
        solver = "priori-ls"
    else:
        cfg = build_solver_config(y, ls_opts)
        result = solve_ls(y, cfg)
        solver = "ls"
    _write_components(Path(args.out), volume.dims, result.decomposition.L, result.decomposition.S)
    reference = load_volume(args.reference) if args.reference else volume
    print("frame,iterations,converged,data_residual,psnr_db")
    print(_metrics_line(1, result, reference, volume.dims))
    print(f"# solver={solver} m={mask.m} rate={mask.rate:.4f}", file=sys.stderr)
    return 0


def _cmd_recon_seq(args) -> int:
    frame_files = sorted(Path(args.frames).glob("*.x"))
    if not frame_files:
        raise FileNotFoundError(f"no *.x frame files found in {args.frames}")
    volumes = [load_volume(f) for f in frame_files]
    dims = volumes[0].dims
    for f, v in zip(frame_files, volumes):
        if v.dims != dims:
            raise ValueError(f"{f}: dims {v.dims} differ from first frame {dims}")

    experiment, ls_opts, priori_opts = _load_options(args.config)
    first_rate = args.first_rate if args.first_rate is not None else experiment.first_frame_rate
    rate = args.rate if args.rate is not None else experiment.rates[0]
    n_x, n_y, _ = dims
    mask_first = make_mask(n_x, n_y, first_rate, experiment.density_falloff, seed=args.mask_seed)
    mask_rest = make_mask(n_x, n_y, rate, experiment.density_falloff, seed=args.mask_seed + 1)
    kspace = [acquire(v, mask_first if t == 0 else mask_rest) for t, v in enumerate(volumes)]

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    log_lines = [f"recon-seq started {time.strftime('%Y-%m-%dT%H:%M:%S')}"]
    cfg_first = build_solver_config(kspace[0], ls_opts)
    if args.solver == "priori-ls":
        note = "frame 1: no prior available, falling back to plain L+S"
        log_lines.append(note)
        print(note, file=sys.stderr)
        rest_opts = priori_opts
        cfg_rest = build_solver_config(kspace[1], rest_opts) if len(kspace) > 1 else cfg_first
        results = solve_sequence(kspace, cfg_first, cfg_rest)
    else:
        cfg_rest = build_solver_config(kspace[1], ls_opts) if len(kspace) > 1 else cfg_first
        results = [solve_ls(y, cfg_first if t == 0 else cfg_rest) for t, y in enumerate(kspace)]

    metrics = ["frame,iterations,converged,data_residual,psnr_db"]
    for t, result in enumerate(results):
        _write_components(out / f"frame{t + 1:04d}", dims,
                          result.decomposition.L, result.decomposition.S)
        metrics.append(_metrics_line(t + 1, result, volumes[t], dims))
    (out / "metrics.csv").write_text("\n".join(metrics) + "\n")
    log_lines.append(f"recon-seq finished {time.strftime('%Y-%m-%dT%H:%M:%S')}")
    (out / "run.log").write_text("\n".join(log_lines) + "\n")
    print("\n".join(metrics))
    return 0


def _cmd_sweep(args) -> int:
    experiment, ls_opts, priori_opts = parse_config(args.config)
    if args.out is not None:
        experiment = replace(experiment, output_dir=args.out)
    if args.n_seeds is not None:
        experiment = replace(experiment, n_seeds=args.n_seeds)
    rows = run_sweep(experiment, ls_opts, priori_opts)
    print(f"wrote {len(rows)} rows to {Path(experiment.output_dir) / 'sweep.csv'}")
    return 0


def _cmd_eval(args) -> int:
    reference = load_volume(args.reference)
    estimate = load_volume(args.estimate)
    value = psnr(reference, estimate)
    print(f"psnr_db={'inf' if np.isinf(value) else f'{value:.6f}'}")
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "phantom":
            return _cmd_phantom_gen(args)
        if args.command == "mask":
            return _cmd_mask_gen(args)
        if args.command == "recon":
            return _cmd_recon(args, parser)
        if args.command == "recon-seq":
            return _cmd_recon_seq(args)
        if args.command == "sweep":
            return _cmd_sweep(args)
        if args.command == "eval":
            return _cmd_eval(args)
        parser.error(f"unknown command {args.command!r}")
    except SystemExit:
        raise
    except Exception as exc:  # noqa: BLE001 - CLI boundary: report and exit 1
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
