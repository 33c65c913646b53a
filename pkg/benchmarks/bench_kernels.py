"""Time the numba and numpy simulation kernels side by side.

    python3 benchmarks/bench_kernels.py [--trials 10000]
"""

import argparse
import time

from e2ev.sim import HAVE_NUMBA, kernels


def timed(fn, *args):
    t0 = time.perf_counter()
    out = fn(*args)
    return out, time.perf_counter() - t0


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--trials", type=int, default=10_000)
    args = ap.parse_args()
    backends = ["numpy"] + (["numba"] if HAVE_NUMBA else [])
    print(f"{'kernel':<12}{'backend':<8}{'first s':>9}{'warm s':>9}  statistic")
    for backend in backends:
        cold = timed(kernels.detection_trials, 100, 0.2, 0.0, 0.1, 0.0, args.trials, 1, backend)[1]
        m, warm = timed(kernels.detection_trials, 100, 0.2, 0.0, 0.1, 0.0, args.trials, 2, backend)
        rate = (m[:, kernels.CAUGHT] > 0).mean()
        print(f"{'detection':<12}{backend:<8}{cold:>9.3f}{warm:>9.3f}  rate {rate:.4f} (analytic 0.8674)")
    for backend in backends:
        cold = timed(kernels.defamation_trials, 1000, 676, args.trials, 1, backend)[1]
        h, warm = timed(kernels.defamation_trials, 1000, 676, args.trials, 2, backend)
        print(f"{'defamation':<12}{backend:<8}{cold:>9.3f}{warm:>9.3f}  mean {h.mean():.3f} (expected 1.479)")


if __name__ == "__main__":
    main()
