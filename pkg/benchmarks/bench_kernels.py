"""Benchmark the compiled convolution kernel against the pure-Python fallback.

Times a full series product (all N Cauchy coefficients) at several orders and
precisions, which is the inner loop of both the Taylor integrator and the
manifold expansion.

Usage: python3 benchmarks/bench_kernels.py
"""

import random
import time

import gmpy2

from cpsplit.kernels import HAVE_COMPILED, conv_coeff, conv_coeff_python


def series_product(kernel, prec, a, b, jweight):
    return [kernel(prec, a, b, k, jweight) for k in range(len(a))]


def bench(prec, N, repeats=5):
    rng = random.Random(12345)
    with gmpy2.context(precision=prec):
        a = [gmpy2.mpfr(rng.uniform(-1, 1)) for _ in range(N)]
        b = [gmpy2.mpfr(rng.uniform(-1, 1)) for _ in range(N)]
        rows = []
        for label, kernel in (("compiled", conv_coeff),
                              ("python", conv_coeff_python)):
            if label == "compiled" and not HAVE_COMPILED:
                continue
            best = float("inf")
            for _ in range(repeats):
                t0 = time.perf_counter()
                out = series_product(kernel, prec, a, b, jweight=False)
                out_j = series_product(kernel, prec, a, b, jweight=True)
                best = min(best, time.perf_counter() - t0)
            rows.append((label, best, out, out_j))
    if len(rows) == 2:
        assert rows[0][2] == rows[1][2], "kernels disagree (plain)"
        assert rows[0][3] == rows[1][3], "kernels disagree (jweight)"
    return rows


def main():
    print("compiled extension available:", HAVE_COMPILED)
    print("{:>6} {:>6} {:>12} {:>12} {:>8}".format(
        "bits", "N", "compiled_s", "python_s", "speedup"))
    for prec in (256, 512, 1024):
        for N in (64, 128, 256):
            rows = bench(prec, N)
            times = {label: best for label, best, _, _ in rows}
            comp = times.get("compiled")
            py = times["python"]
            print("{:>6} {:>6} {:>12} {:>12} {:>8}".format(
                prec, N,
                "{:.4f}".format(comp) if comp is not None else "n/a",
                "{:.4f}".format(py),
                "{:.2f}x".format(py / comp) if comp else "n/a"))


if __name__ == "__main__":
    main()
