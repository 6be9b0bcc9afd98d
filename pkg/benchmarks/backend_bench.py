"""Benchmark the compiled kernels against the pure-Python reference.

Times the three hot paths on representative workloads: dispatch-window LP
solves (cold and warm), switching-regression likelihood evaluations inside an
MLE fit, and the time-varying-coefficient filter.  Run from the repo root:

    python3 benchmarks/backend_bench.py
"""
from __future__ import annotations

import time

import numpy as np

from mefkit import _kernels, dispatch, lp
from mefkit._kernels import pyref
from mefkit.estimators import fit_dlr, fit_msdr
from mefkit.estimators.prep import DiffPair
from mefkit.toys import toy_de_3tech

try:
    from mefkit._kernels import _native as native
except ImportError:
    native = None


def timed(fn, repeat=3):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - t0)
    return best, result


def bench_dispatch(module):
    _kernels.impl = module
    scenario = toy_de_3tech(10)

    def run():
        return dispatch.run_year(scenario, keep_bases=False)

    seconds, out = timed(run, repeat=2)
    return seconds, float(out.emissions.sum())


def bench_window_lp(module):
    _kernels.impl = module
    scenario = toy_de_3tech(3)
    window = dispatch.windows_for(72)[1]
    prog = dispatch.build_window_lp(scenario, window)

    def run():
        return lp.solve(prog).objective_value

    return timed(run, repeat=3)


def bench_msdr(module):
    _kernels.impl = module
    rng = np.random.default_rng(0)
    n = 2000
    x = rng.standard_normal(n)
    states = (rng.random(n) < 0.5).astype(int)
    y = np.where(states, 0.9, 0.1) * x + 0.1 * rng.standard_normal(n)
    pair = DiffPair(y, x, 0.0, 1.0, 0.0, 1.0, None)

    def run():
        return fit_msdr(pair, k=2, seed=0).loglik

    return timed(run, repeat=1)


def bench_dlr(module):
    _kernels.impl = module
    rng = np.random.default_rng(1)
    n = 2000
    x = rng.standard_normal(n)
    y = 0.4 * x + 0.05 * rng.standard_normal(n)
    pair = DiffPair(y, x, 0.0, 1.0, 0.0, 1.0, None)

    def run():
        return fit_dlr(pair).loglik

    return timed(run, repeat=1)


def main() -> None:
    benches = [
        ("window LP solve (72 h, cold)", bench_window_lp),
        ("10-day dispatch year", bench_dispatch),
        ("MSDR fit (n=2000, k=2)", bench_msdr),
        ("DLR fit (n=2000)", bench_dlr),
    ]
    backends = [("python", pyref)]
    if native is not None:
        backends.append(("native", native))
    else:
        print("compiled extension not built; timing the fallback only")

    print(f"{'benchmark':<32}" + "".join(f"{name:>12}" for name, _ in backends)
          + ("     speedup" if len(backends) == 2 else ""))
    for label, bench in benches:
        times = []
        checks = []
        for _, module in backends:
            seconds, check = bench(module)
            times.append(seconds)
            checks.append(check)
        row = f"{label:<32}" + "".join(f"{t * 1e3:>10.1f}ms" for t in times)
        if len(times) == 2:
            row += f"{times[0] / times[1]:>11.1f}x"
            if not np.isclose(checks[0], checks[1], rtol=1e-6):
                row += "  (!) results differ"
        print(row)
    _kernels.impl = native if native is not None else pyref


if __name__ == "__main__":
    main()
