"""Command line entry point: ``dprecon {simulate,maps,recon,grappa,eval}``."""
import argparse
import logging
import os
import sys

import numpy as np

from . import config as cfgmod
from .arrayfile import ArrayFileError, read_array, write_array
from .calibration import AcsBlock, espirit_maps, grappa_recon, infer_r
from .metrics import evaluate
from .operators import SamplingMask, fft2c
from .recon import reconstruct
from .simulate import find_acs, sample_pattern, shepp_logan, simulate_acquisition, simulate_coils

log = logging.getLogger("dprecon")


def _parse_r(text):
    parts = [int(p) for p in str(text).replace("x", ",").split(",") if p.strip()]
    return parts[0] if len(parts) == 1 else tuple(parts)


def _run_config(args, mapping):
    """Config file (if any) overridden by explicitly given flags."""
    cfg = cfgmod.load(args.config) if getattr(args, "config", None) else cfgmod.RunConfig()
    for flag, field in mapping.items():
        val = getattr(args, flag)
        if val is not None:
            setattr(cfg, field, val)
    return cfg


def _load_mask(path):
    m = read_array(path).real.astype(np.float64)
    return SamplingMask(m, find_acs(m))


def cmd_simulate(args):
    cfg = _run_config(args, {"h": "h", "w": "w", "coils": "coils", "pattern": "pattern",
                             "r": "r", "acs": "acs", "noise": "noise", "seed": "seed",
                             "phase_strength": "phase_strength"})
    x = shepp_logan(cfg.h, cfg.w, cfg.phase_strength, cfg.seed)
    S = simulate_coils(cfg.coils, cfg.h, cfg.w, cfg.seed)
    P = sample_pattern(cfg.pattern, cfg.h, cfg.w, _parse_r(cfg.r), cfg.acs)
    # noise level is relative to the largest noiseless k-space magnitude
    sigma = cfg.noise * np.abs(fft2c(S * x[None])).max()
    d_full, d_u = simulate_acquisition(x, S, P, sigma, cfg.seed)
    os.makedirs(args.out_dir, exist_ok=True)
    for name, arr in [("truth", x), ("maps", S), ("mask", P.mask),
                      ("kspace_full", d_full), ("kspace_und", d_u)]:
        write_array(os.path.join(args.out_dir, f"{name}.nldt"), arr)
    print(f"wrote {args.out_dir} (effective acceleration {P.acceleration:.3f})")


def cmd_maps(args):
    d = read_array(args.kspace).astype(np.complex128)
    P = _load_mask(args.mask)
    r0, r1, c0, c1 = P.acs_rect
    acs = AcsBlock(d[:, r0:r1, c0:c1].copy(), (r0, c0))
    maps, support = espirit_maps(acs, d.shape[1], d.shape[2], args.kernel,
                                 args.sv_thresh, args.eig_thresh)
    write_array(args.out, maps)
    print(f"wrote {args.out} (support {support.mean() * 100:.1f}% of FOV)")


def cmd_recon(args):
    cfg = _run_config(args, {"filters": "filters", "depth": "depth", "iters": "iterations",
                             "lr": "lr", "lam": "lam", "seed": "seed",
                             "checkpoint_every": "checkpoint_every",
                             "checkpoint_dir": "checkpoint_dir"})
    d = read_array(args.kspace).astype(np.complex128)
    S = read_array(args.maps).astype(np.complex128)
    P = _load_mask(args.mask)

    def progress(it, data, reg, total):
        if args.verbose and (it % 100 == 0):
            log.info("iter %d data %.6g reg %.6g total %.6g", it, data, reg, total)

    res = reconstruct(d, S, P, cfg.recon_config(), callback=progress)
    write_array(args.out, res.image)
    if args.history_csv:
        with open(args.history_csv, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("iter,data,reg,total\n")
            for i, (data, reg, total) in enumerate(res.loss_history):
                fh.write(f"{i},{float(data)!r},{float(reg)!r},{float(total)!r}\n")
    print(f"wrote {args.out} ({res.iterations_run} iterations, "
          f"final data term {res.loss_history[-1, 0]:.6g})")


def cmd_grappa(args):
    d = read_array(args.kspace).astype(np.complex128)
    P = _load_mask(args.mask)
    R = args.r if args.r else infer_r(P.mask)
    filled, image = grappa_recon(d, P, R=R, kern=(args.lines, args.taps), ridge=args.ridge)
    write_array(args.out, filled)
    image_out = args.image_out or os.path.splitext(args.out)[0] + "_rsos.nldt"
    write_array(image_out, image)
    print(f"wrote {args.out} and {image_out}")


def cmd_eval(args):
    ref = read_array(args.ref)
    test = read_array(args.test)
    rep = evaluate(ref, test)
    text = rep.csv_header() + "\n" + rep.csv_row() + "\n"
    if args.out_csv:
        with open(args.out_csv, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    sys.stdout.write(text)


def build_parser():
    p = argparse.ArgumentParser(prog="dprecon", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="write a synthetic multi-coil acquisition")
    s.add_argument("--config")
    s.add_argument("--h", type=int)
    s.add_argument("--w", type=int)
    s.add_argument("--coils", type=int)
    s.add_argument("--pattern", choices=["uniform1d", "uniform2d"])
    s.add_argument("--r", help="acceleration, e.g. 4 or 2x2")
    s.add_argument("--acs", type=int)
    s.add_argument("--noise", type=float, help="noise std relative to max |k|")
    s.add_argument("--phase-strength", dest="phase_strength", type=float)
    s.add_argument("--seed", type=int)
    s.add_argument("--out-dir", required=True)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("maps", help="estimate coil sensitivities from the ACS region")
    s.add_argument("--kspace", required=True)
    s.add_argument("--mask", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--kernel", type=int, default=6)
    s.add_argument("--sv-thresh", type=float, default=0.01)
    s.add_argument("--eig-thresh", type=float, default=0.9)
    s.set_defaults(func=cmd_maps)

    s = sub.add_parser("recon", help="untrained-network reconstruction")
    s.add_argument("--config")
    s.add_argument("--kspace", required=True)
    s.add_argument("--mask", required=True)
    s.add_argument("--maps", required=True)
    s.add_argument("--filters", type=int)
    s.add_argument("--depth", type=int)
    s.add_argument("--iters", type=int)
    s.add_argument("--lr", type=float)
    s.add_argument("--lambda", dest="lam", type=float)
    s.add_argument("--seed", type=int)
    s.add_argument("--checkpoint-every", dest="checkpoint_every", type=int)
    s.add_argument("--checkpoint-dir", dest="checkpoint_dir")
    s.add_argument("--out", required=True)
    s.add_argument("--history-csv")
    s.set_defaults(func=cmd_recon)

    s = sub.add_parser("grappa", help="GRAPPA baseline (uniform 1-D patterns)")
    s.add_argument("--kspace", required=True)
    s.add_argument("--mask", required=True)
    s.add_argument("--out", required=True, help="filled k-space file")
    s.add_argument("--image-out", help="rsos image file (default: <out>_rsos.nldt)")
    s.add_argument("--r", type=int, help="acceleration (default: inferred from mask)")
    s.add_argument("--lines", type=int, default=4)
    s.add_argument("--taps", type=int, default=5)
    s.add_argument("--ridge", type=float, default=1e-4)
    s.set_defaults(func=cmd_grappa)

    s = sub.add_parser("eval", help="PSNR / SSIM / NRMSE of magnitude images")
    s.add_argument("--ref", required=True)
    s.add_argument("--test", required=True)
    s.add_argument("--out-csv")
    s.set_defaults(func=cmd_eval)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    try:
        args.func(args)
    except (ArrayFileError, cfgmod.ConfigError, ValueError, OSError,
            FloatingPointError) as exc:
        print(f"dprecon {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
