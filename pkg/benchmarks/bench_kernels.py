"""Compare the compiled and numpy kernel backends.

Usage: python3 benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import time

import numpy as np

from dprecon import kernels
from dprecon.autodiff import Tape, Tensor, sum_squares
from dprecon.unet import UNetConfig, build_unet, unet_forward


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases():
    r = np.random.default_rng(0)
    x = r.standard_normal((32, 64, 64))
    cols = kernels.im2col(x, 3, 1, 1)
    up = r.standard_normal((32, 32, 32))
    upg = r.standard_normal((32, 64, 64))
    params = build_unet(UNetConfig(depth=3, filters=32, seed=0))
    x0 = Tensor(r.standard_normal((2, 64, 64)))

    def step():
        tape = Tape()
        q = params.on_tape(tape)
        tape.backward(sum_squares(unet_forward(q, x0, tape), tape))

    return [
        ("im2col 32x64x64 k3", lambda: kernels.im2col(x, 3, 1, 1)),
        ("col2im 32x64x64 k3", lambda: kernels.col2im(cols, 32, 64, 64, 3, 1, 1)),
        ("upsample x2 32x32x32", lambda: kernels.upsample(up, 2)),
        ("upsample adjoint 32x64x64", lambda: kernels.upsample_adjoint(upg, 2)),
        ("U-net fwd+bwd depth3 f32 64x64", step),
    ]


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args()

    backends = ["python"]
    try:
        kernels.use_backend("cython")
        backends.append("cython")
    except ImportError:
        print("compiled extension not built; timing numpy fallback only")

    results = {}
    for name in backends:
        kernels.use_backend(name)
        for label, fn in cases():
            fn()
            results[label, name] = best_of(fn, args.repeat)

    print(f"{'case':34s} " + " ".join(f"{b:>10s}" for b in backends)
          + ("    speedup" if len(backends) == 2 else ""))
    for label, _ in cases():
        row = [results[label, b] for b in backends]
        line = f"{label:34s} " + " ".join(f"{t * 1e3:8.2f}ms" for t in row)
        if len(row) == 2:
            line += f"  {row[0] / row[1]:8.2f}x"
        print(line)


if __name__ == "__main__":
    main()
