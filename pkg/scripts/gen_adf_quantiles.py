"""Regenerate the unit-root test's null-distribution quantile table.

Simulates the t-statistic of the lagged level in the constant-case
first-difference regression under a pure random walk (the test's null), and
freezes a quantile grid into ``mefkit/estimators/_adf_quantiles.py``.  The
regression is solved in closed form (partialled-out constant), vectorized
across simulations, so half a million paths take a few seconds.

Run from the repo root:  python3 scripts/gen_adf_quantiles.py
"""
from __future__ import annotations

from pathlib import Path

import numpy as np

N_SIMS = 500_000
T = 1_000
SEED = 20240801

PROBS = np.array([
    0.001, 0.0025, 0.005, 0.01, 0.02, 0.03, 0.05, 0.075, 0.10, 0.15,
    0.20, 0.30, 0.40, 0.50, 0.60, 0.70, 0.80, 0.90, 0.95, 0.975, 0.99, 0.999,
])


def simulate_stats(n_sims: int, t_len: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    stats = np.empty(n_sims)
    chunk = 20_000
    done = 0
    while done < n_sims:
        m = min(chunk, n_sims - done)
        y = np.cumsum(rng.standard_normal((m, t_len)), axis=1)
        lag = y[:, :-1]
        dy = np.diff(y, axis=1)
        n = t_len - 1
        # regress dy on [1, lag]: partial out the constant
        lag_c = lag - lag.mean(axis=1, keepdims=True)
        dy_c = dy - dy.mean(axis=1, keepdims=True)
        sxx = np.sum(lag_c * lag_c, axis=1)
        rho = np.sum(lag_c * dy_c, axis=1) / sxx
        resid = dy_c - rho[:, None] * lag_c
        sigma2 = np.sum(resid * resid, axis=1) / (n - 2)
        stats[done:done + m] = rho / np.sqrt(sigma2 / sxx)
        done += m
    return stats


def main() -> None:
    stats = simulate_stats(N_SIMS, T, SEED)
    quantiles = np.quantile(stats, PROBS)
    target = Path(__file__).resolve().parents[1] / "src" / "mefkit" / \
        "estimators" / "_adf_quantiles.py"
    lines = [
        '"""Null-distribution quantiles of the unit-root t-statistic',
        "(constant case), generated by scripts/gen_adf_quantiles.py",
        f"from {N_SIMS} random walks of length {T} with seed {SEED}.",
        '"""',
        "import numpy as np",
        "",
        "PROBS = np.array([",
    ]
    lines += [f"    {p!r}," for p in PROBS.tolist()]
    lines += ["])", "", "QUANTILES = np.array(["]
    lines += [f"    {q!r}," for q in quantiles.tolist()]
    lines += ["])", ""]
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text("\n".join(lines), encoding="utf-8")
    print(f"wrote {target}")
    for p in (0.01, 0.05, 0.10):
        q = float(np.interp(p, PROBS, quantiles))
        print(f"  {p:>5.0%} quantile: {q:+.4f}")


if __name__ == "__main__":
    main()
