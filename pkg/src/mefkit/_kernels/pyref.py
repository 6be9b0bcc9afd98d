"""Pure-Python/numpy reference implementations of the hot kernels.

The compiled extension (``_native``) implements the same functions with the
same call signatures and the same pivoting/tie-breaking rules; either backend
can serve the solvers.  These versions are the semantic reference and the
import-time fallback when the extension is unavailable.

Status codes shared by both backends:

* simplex loops: 0 optimal, 1 unbounded (primal) / infeasible (dual),
  2 iteration budget exhausted (caller refactorizes and re-enters),
  3 pivot too small (caller refactorizes).
"""
from __future__ import annotations

import math

import numpy as np

OPTIMAL = 0
UNBOUNDED = 1
ITER_LIMIT = 2
SINGULAR = 3

# variable states
AT_LOWER = 0
AT_UPPER = 1
BASIC = 2
FREE = 3

_PIVOT_TOL = 1e-11
_RATIO_TOL = 1e-9


def recompute_basics(indptr, indices, data, colind, lo, up, b, vstat, basis, binv, x):
    """Set nonbasic variables to their bounds and recompute basic values."""
    at_lower = vstat == AT_LOWER
    at_upper = vstat == AT_UPPER
    x[at_lower] = lo[at_lower]
    x[at_upper] = up[at_upper]
    x[vstat == FREE] = 0.0
    xn = x.copy()
    xn[basis] = 0.0
    contrib = data * xn[colind]
    r = b - np.bincount(indices, weights=contrib, minlength=b.size)
    x[basis] = binv @ r


def _reduced_costs(colind, indices, data, c, basis, binv):
    y = binv.T @ c[basis]
    aty = np.bincount(colind, weights=data * y[indices], minlength=c.size)
    return c - aty, y


def _ftran(indptr, indices, data, binv, q):
    p0, p1 = indptr[q], indptr[q + 1]
    rows = indices[p0:p1]
    vals = data[p0:p1]
    return binv[:, rows] @ vals


def primal_loop(indptr, indices, data, colind, c, lo, up, b, vstat, basis, binv, x,
                max_iter, opt_tol=1e-9, bland_after=40):
    """Bounded-variable revised primal simplex with Dantzig pricing.

    Anti-cycling: after ``bland_after`` consecutive degenerate pivots the
    entering choice falls back to Bland's rule (lowest eligible index) until a
    nondegenerate step occurs.  Ties break on the lowest variable index.
    """
    m = b.size
    recompute_basics(indptr, indices, data, colind, lo, up, b, vstat, basis, binv, x)
    iters = 0
    degen_streak = 0
    while iters < max_iter:
        d, _ = _reduced_costs(colind, indices, data, c, basis, binv)
        viol = np.zeros(c.size)
        movable = (up - lo) > 0.0  # fixed variables never enter
        mask_lo = movable & (vstat == AT_LOWER) & (d < -opt_tol)
        mask_up = movable & (vstat == AT_UPPER) & (d > opt_tol)
        mask_fr = (vstat == FREE) & (np.abs(d) > opt_tol)
        viol[mask_lo] = -d[mask_lo]
        viol[mask_up] = d[mask_up]
        viol[mask_fr] = np.abs(d[mask_fr])
        if not viol.any():
            return OPTIMAL, iters
        if degen_streak >= bland_after:
            q = int(np.flatnonzero(viol > 0)[0])
        else:
            q = int(np.argmax(viol))
        delta = 1.0
        if vstat[q] == AT_UPPER or (vstat[q] == FREE and d[q] > 0):
            delta = -1.0

        w = _ftran(indptr, indices, data, binv, q)
        dw = delta * w
        xb = x[basis]
        theta_rows = np.full(m, np.inf)
        pos = dw > _PIVOT_TOL
        if pos.any():
            lob = lo[basis[pos]]
            num = xb[pos] - lob
            theta_rows[pos] = np.where(np.isfinite(lob),
                                       np.maximum(num, 0.0) / dw[pos], np.inf)
        neg = dw < -_PIVOT_TOL
        if neg.any():
            upb = up[basis[neg]]
            num = upb - xb[neg]
            theta_rows[neg] = np.where(np.isfinite(upb),
                                       np.maximum(num, 0.0) / (-dw[neg]), np.inf)
        theta_bound = up[q] - lo[q] if vstat[q] != FREE else np.inf
        tmin_rows = theta_rows.min() if m else np.inf
        theta = min(tmin_rows, theta_bound)
        if not np.isfinite(theta):
            return UNBOUNDED, iters

        iters += 1
        degen_streak = degen_streak + 1 if theta <= _RATIO_TOL else 0
        if theta_bound <= tmin_rows:
            vstat[q] = AT_UPPER if vstat[q] == AT_LOWER else AT_LOWER
            recompute_basics(indptr, indices, data, colind, lo, up, b, vstat,
                             basis, binv, x)
            continue

        ties = np.flatnonzero(theta_rows <= tmin_rows + 1e-12 * (1.0 + tmin_rows))
        r = int(ties[np.argmin(basis[ties])])
        p = w[r]
        if abs(p) < _PIVOT_TOL:
            return SINGULAR, iters
        leave = basis[r]
        vstat[leave] = AT_LOWER if dw[r] > 0 else AT_UPPER
        vstat[q] = BASIC
        basis[r] = q
        wcol = w.copy()
        wcol[r] = 0.0
        binv[r, :] /= p
        binv -= np.outer(wcol, binv[r, :])
        recompute_basics(indptr, indices, data, colind, lo, up, b, vstat, basis,
                         binv, x)
    return ITER_LIMIT, iters


def dual_loop(indptr, indices, data, colind, c, lo, up, b, vstat, basis, binv, x,
              max_iter, opt_tol=1e-9, feas_tol=1e-9):
    """Bounded-variable dual simplex from a dual-feasible basis.

    Used for warm re-solves after rhs/bound changes; leaves the basis primal
    and dual feasible on OPTIMAL.
    """
    m = b.size
    recompute_basics(indptr, indices, data, colind, lo, up, b, vstat, basis, binv, x)
    iters = 0
    while iters < max_iter:
        xb = x[basis]
        lob = lo[basis]
        upb = up[basis]
        scale = 1.0 + np.abs(b).max() if m else 1.0
        viol_lo = np.where(np.isfinite(lob), lob - xb, -np.inf)
        viol_up = np.where(np.isfinite(upb), xb - upb, -np.inf)
        viol = np.maximum(viol_lo, viol_up)
        r = int(np.argmax(viol))
        if viol[r] <= feas_tol * scale:
            return OPTIMAL, iters
        below = viol_lo[r] >= viol_up[r]

        rho = binv[r, :]
        alpha = np.bincount(colind, weights=data * rho[indices], minlength=c.size)
        d, _ = _reduced_costs(colind, indices, data, c, basis, binv)

        # entering candidates must move the leaving variable toward its bound
        movable = (up - lo) > 0.0
        if below:  # x_Br must increase: delta x_Br = -alpha_j * delta x_j > 0
            ok_lo = movable & (vstat == AT_LOWER) & (alpha < -_PIVOT_TOL)
            ok_up = movable & (vstat == AT_UPPER) & (alpha > _PIVOT_TOL)
            ok_fr = (vstat == FREE) & (np.abs(alpha) > _PIVOT_TOL)
        else:
            ok_lo = movable & (vstat == AT_LOWER) & (alpha > _PIVOT_TOL)
            ok_up = movable & (vstat == AT_UPPER) & (alpha < -_PIVOT_TOL)
            ok_fr = (vstat == FREE) & (np.abs(alpha) > _PIVOT_TOL)
        eligible = ok_lo | ok_up | ok_fr
        if not eligible.any():
            return UNBOUNDED, iters  # dual unbounded == primal infeasible

        ratio = np.full(c.size, np.inf)
        el = np.flatnonzero(eligible)
        ratio[el] = np.abs(d[el]) / np.abs(alpha[el])
        rmin = ratio[el].min()
        ties = np.flatnonzero(ratio <= rmin + 1e-12 * (1.0 + rmin))
        q = int(ties[0])

        w = _ftran(indptr, indices, data, binv, q)
        p = w[r]
        if abs(p) < _PIVOT_TOL:
            return SINGULAR, iters
        leave = basis[r]
        vstat[leave] = AT_LOWER if below else AT_UPPER
        vstat[q] = BASIC
        basis[r] = q
        wcol = w.copy()
        wcol[r] = 0.0
        binv[r, :] /= p
        binv -= np.outer(wcol, binv[r, :])
        recompute_basics(indptr, indices, data, colind, lo, up, b, vstat, basis,
                         binv, x)
        iters += 1
    return ITER_LIMIT, iters


# ---------------------------------------------------------------------------
# sequential filters


def hamilton_filter(logdens, trans, pi0):
    """Forward filter for a Markov-switching regression.

    ``logdens[t, k]`` is the log observation density under regime ``k``;
    ``trans[i, j]`` the probability of moving from regime ``i`` to ``j``.
    Returns (loglik, filtered (T,k), predicted (T,k)).
    """
    T, k = logdens.shape
    filtered = np.empty((T, k))
    predicted = np.empty((T, k))
    xi = np.asarray(pi0, dtype=np.float64).copy()
    pt = np.asarray(trans, dtype=np.float64).T
    loglik = 0.0
    for t in range(T):
        pred = pt @ xi
        mx = logdens[t].max()
        wt = pred * np.exp(logdens[t] - mx)
        s = wt.sum()
        if not (s > 0.0) or not math.isfinite(s):
            raise ValueError(f"filter diverged at step {t}")
        loglik += mx + math.log(s)
        xi = wt / s
        predicted[t] = pred
        filtered[t] = xi
    return loglik, filtered, predicted


def msdr_loglik(y, x, beta0, beta1, sigma2, trans, pi0):
    """Filtered log-likelihood of the switching regression (scalar only)."""
    resid = y[:, None] - beta0[None, :] - beta1[None, :] * x[:, None]
    logdens = -0.5 * (np.log(2.0 * np.pi * sigma2)[None, :]
                      + resid ** 2 / sigma2[None, :])
    ll, _, _ = hamilton_filter(logdens, trans, pi0)
    return ll


def tvc_filter(y, z, q0, q1, r, m0, p0):
    """Kalman filter for y_t = a0_t + a1_t z_t + v, with random-walk states.

    Returns (loglik, filtered state means (T,2), filtered covariances (T,3)
    packed as (p00, p01, p11)).
    """
    T = y.size
    means = np.empty((T, 2))
    covs = np.empty((T, 3))
    a0, a1 = float(m0[0]), float(m0[1])
    p00, p01, p11 = float(p0[0, 0]), float(p0[0, 1]), float(p0[1, 1])
    ll = 0.0
    log2pi = math.log(2.0 * math.pi)
    for t in range(T):
        zt = z[t]
        pr00 = p00 + q0
        pr01 = p01
        pr11 = p11 + q1
        u0 = pr00 + zt * pr01
        u1 = pr01 + zt * pr11
        s = u0 + zt * u1 + r
        if not (s > 0.0) or not math.isfinite(s):
            raise ValueError(f"filter diverged at step {t}")
        e = y[t] - (a0 + a1 * zt)
        ll += -0.5 * (log2pi + math.log(s) + e * e / s)
        k0 = u0 / s
        k1 = u1 / s
        a0 += k0 * e
        a1 += k1 * e
        p00 = pr00 - k0 * u0
        p01 = pr01 - k0 * u1
        p11 = pr11 - k1 * u1
        means[t, 0] = a0
        means[t, 1] = a1
        covs[t, 0] = p00
        covs[t, 1] = p01
        covs[t, 2] = p11
    return ll, means, covs
