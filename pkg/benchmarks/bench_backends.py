"""Compare the accelerated kernels against the plain-numpy fallback.

Times the three elementwise transforms on a large random image and the
Monte-Carlo noise driver on a smaller one, for every available backend.

    python benchmarks/bench_backends.py --side 512 --repeats 5
"""

import argparse
import time

import numpy as np

from icd.backend import available_backends, get_kernels
from icd.kernels import MODE_MAX


def timeit(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_backend(name, img, mc_img, eps, trials, repeats):
    k = get_kernels(name)
    inten, chroma = k.decompose_kernel(img, eps, MODE_MAX)
    anchor = mc_img.argmax(axis=2)
    _, mc_chroma = k.decompose_kernel(mc_img, eps, MODE_MAX)
    eta = np.random.default_rng(0).normal(0.0, 0.01, mc_img.shape)

    def run_mc():
        for t in range(trials):
            k.mc_trial_sums(mc_img, mc_chroma, anchor, eta, eps)

    # warm up once so jit compilation never lands inside a timed region
    k.reconstruct_kernel(inten, chroma, eps)
    k.gate_kernel(inten, chroma, 0.5, 2.0)
    k.mc_trial_sums(mc_img, mc_chroma, anchor, eta, eps)

    return {
        "decompose": timeit(lambda: k.decompose_kernel(img, eps, MODE_MAX), repeats),
        "reconstruct": timeit(lambda: k.reconstruct_kernel(inten, chroma, eps), repeats),
        "gate": timeit(lambda: k.gate_kernel(inten, chroma, 0.5, 2.0), repeats),
        f"mc x{trials}": timeit(run_mc, repeats),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--side", type=int, default=512, help="image side length")
    ap.add_argument("--mc-side", type=int, default=64, help="Monte-Carlo image side")
    ap.add_argument("--trials", type=int, default=50, help="Monte-Carlo trials per repeat")
    ap.add_argument("--repeats", type=int, default=5, help="repeats, best-of reported")
    ap.add_argument("--eps", type=float, default=1e-4)
    args = ap.parse_args()

    rng = np.random.default_rng(2024)
    img = rng.random((args.side, args.side, 3))
    mc_img = rng.uniform(0.2, 1.0, (args.mc_side, args.mc_side, 3))

    results = {
        name: bench_backend(name, img, mc_img, args.eps, args.trials, args.repeats)
        for name in available_backends()
    }

    names = list(results)
    ops = list(next(iter(results.values())))
    width = max(len(op) for op in ops) + 2
    header = f"{'operation':<{width}}" + "".join(f"{n:>12}" for n in names)
    if len(names) == 2:
        header += f"{'speedup':>10}"
    print(f"image {args.side}x{args.side}, mc {args.mc_side}x{args.mc_side}, "
          f"best of {args.repeats}")
    print(header)
    print("-" * len(header))
    for op in ops:
        row = f"{op:<{width}}"
        for n in names:
            row += f"{results[n][op] * 1e3:>10.2f}ms"
        if len(names) == 2:
            a, b = (results[n][op] for n in names)
            row += f"{b / a:>9.1f}x"
        print(row)


if __name__ == "__main__":
    main()
