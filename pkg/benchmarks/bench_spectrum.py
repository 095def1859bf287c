"""Time the characteristic-spectrum kernels: numba vs numpy vs the naive O(8^n) oracle.

    python3 benchmarks/bench_spectrum.py --n-max 12 --repeats 3
"""
import argparse
import time

import numpy as np

from stabent import _jit
from stabent.pauli import char_spectrum, haar_state, naive_char_spectrum


def best_of(fn, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n-min", type=int, default=2)
    ap.add_argument("--n-max", type=int, default=12)
    ap.add_argument("--naive-max", type=int, default=4)
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()

    backends = ["numpy"] + (["numba"] if _jit.HAVE_NUMBA else [])
    if _jit.HAVE_NUMBA:
        char_spectrum(haar_state(2, 0), backend="numba")  # compile / load cache

    print(f"{'n':>3} " + " ".join(f"{b:>10}" for b in backends) + f" {'naive':>10} {'max|diff|':>10}")
    for n in range(args.n_min, args.n_max + 1):
        psi = haar_state(n, n)
        row, ref = [], None
        for b in backends:
            t, spec = best_of(lambda: char_spectrum(psi, backend=b), args.repeats)
            row.append(f"{t:10.4f}")
            diff = 0.0 if ref is None else float(np.max(np.abs(spec.xi - ref)))
            ref = spec.xi if ref is None else ref
        naive = "-"
        if n <= args.naive_max:
            t, spec = best_of(lambda: naive_char_spectrum(psi), 1)
            naive = f"{t:.4f}"
            diff = max(diff, float(np.max(np.abs(spec.xi - ref))))
        print(f"{n:>3} " + " ".join(row) + f" {naive:>10} {diff:10.1e}")


if __name__ == "__main__":
    main()
