"""Rolling-window estimation over a full year of differenced data."""
from __future__ import annotations

import numpy as np

from ..model import MefSeries
from . import dlr as dlr_mod
from . import msdr as msdr_mod
from .prep import DiffPair


def window_tiles(n: int, window_len: int, min_tail: int) -> list:
    """Non-overlapping tiles; a too-short remainder merges into the last tile."""
    if n < window_len:
        raise ValueError(f"series of {n} observations shorter than one window "
                         f"({window_len})")
    tiles = []
    pos = 0
    while pos < n:
        if n - pos < window_len:  # remainder
            if n - pos >= min_tail:
                tiles.append((pos, n))
            else:
                tiles[-1] = (tiles[-1][0], n)
            break
        tiles.append((pos, pos + window_len))
        pos += window_len
    return tiles


def rolling_estimate(pair: DiffPair, model: str = "msdr",
                     window_len: int = 168, k="auto", seed: int = 0,
                     destandardize: bool = True,
                     fit_log: list | None = None) -> MefSeries:
    """Tile the year into windows, fit per window, concatenate MEF segments.

    When ``fit_log`` is a list it receives one summary dict per window.
    """
    if model not in ("msdr", "dlr"):
        raise ValueError(f"unknown model {model!r}")
    if model == "msdr":
        k_max = 3 if k == "auto" else int(k)
        min_tail = 10 * k_max
    else:
        min_tail = 20
    tiles = window_tiles(pair.n, window_len, min_tail)

    segments = []
    for (lo, hi) in tiles:
        if model == "msdr":
            kk = msdr_mod.select_k(pair, (lo, hi), seed=seed) if k == "auto" \
                else int(k)
            fit = msdr_mod.fit_msdr(pair, (lo, hi), k=kk, seed=seed)
            segments.append(msdr_mod.msdr_mef(fit, pair, destandardize))
            if fit_log is not None:
                fit_log.append({
                    "window": [lo, hi],
                    "k": fit.k,
                    "intercepts": fit.beta0.tolist(),
                    "slopes": fit.beta1.tolist(),
                    "variances": fit.sigma2.tolist(),
                    "transition": fit.transition.tolist(),
                    "loglik": fit.loglik,
                    "aic": fit.aic,
                    "bic": fit.bic,
                    "converged": fit.converged,
                })
        else:
            fit = dlr_mod.fit_dlr(pair, (lo, hi))
            segments.append(dlr_mod.dlr_mef(fit, pair, destandardize))
            if fit_log is not None:
                fit_log.append({
                    "window": [lo, hi],
                    "state_noise": list(fit.state_noise),
                    "obs_noise": fit.obs_noise,
                    "loglik": fit.loglik,
                })
    values = np.concatenate(segments)
    assert values.size == pair.n
    return MefSeries(pair.start, values, source=model)
