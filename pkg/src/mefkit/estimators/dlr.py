"""Dynamic linear regression: random-walk intercept and slope via Kalman filter.

dE_t = a0_t + a1_t dG_t + v_t with both coefficients evolving as random
walks.  The three noise variances are fitted by maximum likelihood per window;
the hourly MEF estimate is the filtered slope path.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .. import _kernels
from .prep import DiffPair

_LOGV_MIN, _LOGV_MAX = -28.0, 6.0
_P0 = 100.0  # diffuse-ish prior variance on standardized data


@dataclass
class DlrFit:
    alpha: np.ndarray  # (T, 2) filtered [intercept, slope] paths
    cov: np.ndarray  # (T, 3) filtered covariances (p00, p01, p11)
    state_noise: tuple  # (q_intercept, q_slope)
    obs_noise: float
    loglik: float
    n_obs: int
    window: tuple


class FilterDivergence(RuntimeError):
    pass


def _run_filter(y, x, q0, q1, r):
    m0 = np.zeros(2)
    p0 = np.eye(2) * _P0
    return _kernels.impl.tvc_filter(y, x, q0, q1, r, m0, p0)


def _neg_loglik(logv, y, x):
    q0, q1, r = np.exp(np.clip(logv, _LOGV_MIN, _LOGV_MAX))
    try:
        ll, _, _ = _run_filter(y, x, q0, q1, r)
    except ValueError:
        return 1e12
    return -ll if np.isfinite(ll) else 1e12


def fit_dlr(pair: DiffPair, window: tuple | None = None) -> DlrFit:
    lo, hi = window if window is not None else (0, pair.n)
    y = np.ascontiguousarray(pair.d_emissions[lo:hi])
    x = np.ascontiguousarray(pair.d_generation[lo:hi])
    T = y.size
    if T < 20:
        raise ValueError(f"window of {T} observations below the floor of 20")
    if float(x.var()) == 0.0:
        raise ValueError("regressor has zero variance")

    sxx = float(x @ x) or 1.0
    b_ols = float(x @ y) / sxx
    v = max(float((y - b_ols * x).var()), 1e-8)
    bounds = [(_LOGV_MIN, _LOGV_MAX)] * 3
    starts = [
        np.log([v * 1e-3, v * 1e-3, v]),
        np.log([v * 1e-1, v * 1e-1, v]),
        np.log([1e-6, 1e-6, max(v, 1e-4)]),
    ]
    best = None
    for theta0 in starts:
        res = minimize(_neg_loglik, theta0, args=(y, x), method="L-BFGS-B",
                       bounds=bounds, options={"maxiter": 200})
        if best is None or res.fun < best.fun - 1e-10:
            best = res
    q0, q1, r = np.exp(np.clip(best.x, _LOGV_MIN, _LOGV_MAX))
    try:
        ll, means, covs = _run_filter(y, x, q0, q1, r)
    except ValueError as exc:
        raise FilterDivergence(str(exc)) from exc
    return DlrFit(alpha=means, cov=covs, state_noise=(float(q0), float(q1)),
                  obs_noise=float(r), loglik=float(ll), n_obs=T,
                  window=(lo, hi))


def dlr_mef(fit: DlrFit, pair: DiffPair | None = None,
            destandardize: bool = False) -> np.ndarray:
    values = fit.alpha[:, 1].copy()
    if destandardize:
        if pair is None:
            raise ValueError("destandardization needs the DiffPair")
        values *= pair.slope_scale
    return values
