# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled kernels: simplex pivot loops and sequential filters.

Semantics mirror :mod:`mefkit._kernels.pyref` exactly (same pivot rules, same
tie-breaks, same status codes); only the execution strategy differs.
"""
import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY, exp, fabs, isfinite, log, sqrt

cnp.import_array()

OPTIMAL = 0
UNBOUNDED = 1
ITER_LIMIT = 2
SINGULAR = 3

AT_LOWER = 0
AT_UPPER = 1
BASIC = 2
FREE = 3

cdef double _PIVOT_TOL = 1e-11
cdef double _RATIO_TOL = 1e-9
cdef double _PI = 3.141592653589793


cdef void _recompute(const long long[:] indptr, const long long[:] indices,
                     const double[:] data, const double[:] lo,
                     const double[:] up, const double[:] b,
                     const signed char[:] vstat, const long long[:] basis,
                     const double[:, :] binv, double[:] x,
                     double[:] work_m) noexcept:
    cdef Py_ssize_t ncols = vstat.shape[0]
    cdef Py_ssize_t m = basis.shape[0]
    cdef Py_ssize_t j, i, p
    cdef double xj
    for i in range(m):
        work_m[i] = b[i]
    for j in range(ncols):
        if vstat[j] == AT_LOWER:
            x[j] = lo[j]
        elif vstat[j] == AT_UPPER:
            x[j] = up[j]
        elif vstat[j] == FREE:
            x[j] = 0.0
        else:
            continue
        xj = x[j]
        if xj != 0.0:
            for p in range(indptr[j], indptr[j + 1]):
                work_m[indices[p]] -= data[p] * xj
    cdef double acc
    for i in range(m):
        acc = 0.0
        for p in range(m):
            acc += binv[i, p] * work_m[p]
        x[basis[i]] = acc


def recompute_basics(indptr, indices, data, colind, lo, up, b, vstat, basis,
                     binv, x):
    cdef double[:] work_m = np.empty(b.shape[0])
    _recompute(indptr, indices, data, lo, up, b, vstat, basis, binv, x, work_m)


cdef void _reduced_costs(const long long[:] indptr, const long long[:] indices,
                         const double[:] data, const double[:] c,
                         const long long[:] basis, const double[:, :] binv,
                         double[:] y, double[:] d) noexcept:
    cdef Py_ssize_t m = basis.shape[0]
    cdef Py_ssize_t ncols = c.shape[0]
    cdef Py_ssize_t i, j, p
    cdef double acc
    for i in range(m):
        y[i] = 0.0
    for i in range(m):
        acc = c[basis[i]]
        if acc != 0.0:
            for p in range(m):
                y[p] += acc * binv[i, p]
    for j in range(ncols):
        acc = c[j]
        for p in range(indptr[j], indptr[j + 1]):
            acc -= data[p] * y[indices[p]]
        d[j] = acc


cdef void _ftran(const long long[:] indptr, const long long[:] indices,
                 const double[:] data, const double[:, :] binv,
                 Py_ssize_t q, double[:] w) noexcept:
    cdef Py_ssize_t m = binv.shape[0]
    cdef Py_ssize_t i, p
    cdef double a
    for i in range(m):
        w[i] = 0.0
    for p in range(indptr[q], indptr[q + 1]):
        a = data[p]
        for i in range(m):
            w[i] += binv[i, indices[p]] * a


def primal_loop(indptr, indices, data, colind, c, lo, up, b, vstat, basis,
                binv, x, max_iter, double opt_tol=1e-9, int bland_after=40):
    cdef const long long[:] indptr_v = indptr
    cdef const long long[:] indices_v = indices
    cdef const double[:] data_v = data
    cdef const double[:] c_v = c
    cdef const double[:] lo_v = lo
    cdef const double[:] up_v = up
    cdef const double[:] b_v = b
    cdef signed char[:] vstat_v = vstat
    cdef long long[:] basis_v = basis
    cdef double[:, :] binv_v = binv
    cdef double[:] x_v = x
    cdef Py_ssize_t m = basis_v.shape[0]
    cdef Py_ssize_t ncols = c_v.shape[0]
    cdef int iters = 0, limit = int(max_iter), degen_streak = 0
    cdef Py_ssize_t j, i, q, r, leave
    cdef double viol, best_viol, dj, delta, dw, num, theta, theta_bound
    cdef double tmin_rows, tie_tol, piv
    cdef long long best_leave

    cdef double[:] y = np.empty(m)
    cdef double[:] d = np.empty(ncols)
    cdef double[:] w = np.empty(m)
    cdef double[:] theta_rows = np.empty(m)
    cdef double[:] work_m = np.empty(m)

    _recompute(indptr_v, indices_v, data_v, lo_v, up_v, b_v, vstat_v, basis_v,
               binv_v, x_v, work_m)

    while iters < limit:
        _reduced_costs(indptr_v, indices_v, data_v, c_v, basis_v, binv_v, y, d)

        q = -1
        best_viol = 0.0
        for j in range(ncols):
            if vstat_v[j] == BASIC:
                continue
            dj = d[j]
            if vstat_v[j] == AT_LOWER:
                if up_v[j] - lo_v[j] <= 0.0 or dj >= -opt_tol:
                    continue
                viol = -dj
            elif vstat_v[j] == AT_UPPER:
                if up_v[j] - lo_v[j] <= 0.0 or dj <= opt_tol:
                    continue
                viol = dj
            else:  # FREE
                viol = fabs(dj)
                if viol <= opt_tol:
                    continue
            if degen_streak >= bland_after:
                q = j
                break
            if viol > best_viol:
                best_viol = viol
                q = j
        if q < 0:
            return OPTIMAL, iters

        delta = 1.0
        if vstat_v[q] == AT_UPPER or (vstat_v[q] == FREE and d[q] > 0.0):
            delta = -1.0

        _ftran(indptr_v, indices_v, data_v, binv_v, q, w)

        tmin_rows = INFINITY
        for i in range(m):
            dw = delta * w[i]
            leave = basis_v[i]
            if dw > _PIVOT_TOL:
                if isfinite(lo_v[leave]):
                    num = x_v[leave] - lo_v[leave]
                    if num < 0.0:
                        num = 0.0
                    theta_rows[i] = num / dw
                else:
                    theta_rows[i] = INFINITY
            elif dw < -_PIVOT_TOL:
                if isfinite(up_v[leave]):
                    num = up_v[leave] - x_v[leave]
                    if num < 0.0:
                        num = 0.0
                    theta_rows[i] = num / (-dw)
                else:
                    theta_rows[i] = INFINITY
            else:
                theta_rows[i] = INFINITY
            if theta_rows[i] < tmin_rows:
                tmin_rows = theta_rows[i]

        if vstat_v[q] != FREE and isfinite(lo_v[q]) and isfinite(up_v[q]):
            theta_bound = up_v[q] - lo_v[q]
        else:
            theta_bound = INFINITY
        theta = tmin_rows if tmin_rows < theta_bound else theta_bound
        if not isfinite(theta):
            return UNBOUNDED, iters

        iters += 1
        if theta <= _RATIO_TOL:
            degen_streak += 1
        else:
            degen_streak = 0

        if theta_bound <= tmin_rows:
            vstat_v[q] = AT_UPPER if vstat_v[q] == AT_LOWER else AT_LOWER
            _recompute(indptr_v, indices_v, data_v, lo_v, up_v, b_v, vstat_v,
                       basis_v, binv_v, x_v, work_m)
            continue

        tie_tol = tmin_rows + 1e-12 * (1.0 + tmin_rows)
        r = -1
        best_leave = -1
        for i in range(m):
            if theta_rows[i] <= tie_tol:
                if best_leave < 0 or basis_v[i] < best_leave:
                    best_leave = basis_v[i]
                    r = i
        piv = w[r]
        if fabs(piv) < _PIVOT_TOL:
            return SINGULAR, iters
        leave = basis_v[r]
        vstat_v[leave] = AT_LOWER if delta * w[r] > 0.0 else AT_UPPER
        vstat_v[q] = BASIC
        basis_v[r] = q
        w[r] = 0.0
        _update_binv_pivot(binv_v, w, r, piv)
        _recompute(indptr_v, indices_v, data_v, lo_v, up_v, b_v, vstat_v,
                   basis_v, binv_v, x_v, work_m)
    return ITER_LIMIT, iters


cdef void _update_binv_pivot(double[:, :] binv, double[:] w, Py_ssize_t r,
                             double piv) noexcept:
    cdef Py_ssize_t m = binv.shape[0]
    cdef Py_ssize_t i, p
    cdef double factor
    for p in range(m):
        binv[r, p] /= piv
    for i in range(m):
        if i == r:
            continue
        factor = w[i]
        if factor != 0.0:
            for p in range(m):
                binv[i, p] -= factor * binv[r, p]


def dual_loop(indptr, indices, data, colind, c, lo, up, b, vstat, basis,
              binv, x, max_iter, double opt_tol=1e-9, double feas_tol=1e-9):
    cdef const long long[:] indptr_v = indptr
    cdef const long long[:] indices_v = indices
    cdef const double[:] data_v = data
    cdef const double[:] c_v = c
    cdef const double[:] lo_v = lo
    cdef const double[:] up_v = up
    cdef const double[:] b_v = b
    cdef signed char[:] vstat_v = vstat
    cdef long long[:] basis_v = basis
    cdef double[:, :] binv_v = binv
    cdef double[:] x_v = x
    cdef Py_ssize_t m = basis_v.shape[0]
    cdef Py_ssize_t ncols = c_v.shape[0]
    cdef int iters = 0, limit = int(max_iter)
    cdef Py_ssize_t i, j, r, q, leave, p
    cdef double scale, best_viol, v_lo, v_up, viol, aj, ratio, best_ratio, piv
    cdef bint below
    cdef double[:] y = np.empty(m)
    cdef double[:] d = np.empty(ncols)
    cdef double[:] w = np.empty(m)
    cdef double[:] alpha = np.empty(ncols)
    cdef double[:] work_m = np.empty(m)

    _recompute(indptr_v, indices_v, data_v, lo_v, up_v, b_v, vstat_v, basis_v,
               binv_v, x_v, work_m)

    while iters < limit:
        scale = 1.0
        for i in range(m):
            if fabs(b_v[i]) > scale - 1.0:
                scale = 1.0 + fabs(b_v[i])

        r = -1
        best_viol = -INFINITY
        below = False
        for i in range(m):
            leave = basis_v[i]
            v_lo = (lo_v[leave] - x_v[leave]) if isfinite(lo_v[leave]) else -INFINITY
            v_up = (x_v[leave] - up_v[leave]) if isfinite(up_v[leave]) else -INFINITY
            viol = v_lo if v_lo >= v_up else v_up
            if viol > best_viol:
                best_viol = viol
                r = i
                below = v_lo >= v_up
        if r < 0 or best_viol <= feas_tol * scale:
            return OPTIMAL, iters

        # alpha = row r of binv times each column of A
        for j in range(ncols):
            alpha[j] = 0.0
        for j in range(ncols):
            for p in range(indptr_v[j], indptr_v[j + 1]):
                alpha[j] += data_v[p] * binv_v[r, indices_v[p]]
        _reduced_costs(indptr_v, indices_v, data_v, c_v, basis_v, binv_v, y, d)

        q = -1
        best_ratio = INFINITY
        for j in range(ncols):
            if vstat_v[j] == BASIC:
                continue
            aj = alpha[j]
            if fabs(aj) <= _PIVOT_TOL:
                continue
            if vstat_v[j] == AT_LOWER:
                if up_v[j] - lo_v[j] <= 0.0:
                    continue
                if below:
                    if aj >= 0.0:
                        continue
                else:
                    if aj <= 0.0:
                        continue
            elif vstat_v[j] == AT_UPPER:
                if up_v[j] - lo_v[j] <= 0.0:
                    continue
                if below:
                    if aj <= 0.0:
                        continue
                else:
                    if aj >= 0.0:
                        continue
            ratio = fabs(d[j]) / fabs(aj)
            if ratio < best_ratio - 1e-12 * (1.0 + ratio):
                best_ratio = ratio
                q = j
        if q < 0:
            return UNBOUNDED, iters

        _ftran(indptr_v, indices_v, data_v, binv_v, q, w)
        piv = w[r]
        if fabs(piv) < _PIVOT_TOL:
            return SINGULAR, iters
        leave = basis_v[r]
        vstat_v[leave] = AT_LOWER if below else AT_UPPER
        vstat_v[q] = BASIC
        basis_v[r] = q
        w[r] = 0.0
        _update_binv_pivot(binv_v, w, r, piv)
        _recompute(indptr_v, indices_v, data_v, lo_v, up_v, b_v, vstat_v,
                   basis_v, binv_v, x_v, work_m)
        iters += 1
    return ITER_LIMIT, iters


def hamilton_filter(double[:, :] logdens, double[:, :] trans, double[:] pi0):
    cdef Py_ssize_t T = logdens.shape[0]
    cdef Py_ssize_t k = logdens.shape[1]
    filtered_arr = np.empty((T, k))
    predicted_arr = np.empty((T, k))
    cdef double[:, :] filtered = filtered_arr
    cdef double[:, :] predicted = predicted_arr
    cdef double[:] xi = np.empty(k)
    cdef double[:] pred = np.empty(k)
    cdef Py_ssize_t t, i, j
    cdef double loglik = 0.0, mx, s, wt
    for i in range(k):
        xi[i] = pi0[i]
    for t in range(T):
        for j in range(k):
            s = 0.0
            for i in range(k):
                s += trans[i, j] * xi[i]
            pred[j] = s
        mx = logdens[t, 0]
        for j in range(1, k):
            if logdens[t, j] > mx:
                mx = logdens[t, j]
        s = 0.0
        for j in range(k):
            wt = pred[j] * exp(logdens[t, j] - mx)
            xi[j] = wt
            s += wt
        if not (s > 0.0) or not isfinite(s):
            raise ValueError(f"filter diverged at step {t}")
        loglik += mx + log(s)
        for j in range(k):
            xi[j] /= s
            filtered[t, j] = xi[j]
            predicted[t, j] = pred[j]
    return loglik, filtered_arr, predicted_arr


def msdr_loglik(double[:] y, double[:] x, double[:] beta0, double[:] beta1,
                double[:] sigma2, double[:, :] trans, double[:] pi0):
    """Filtered log-likelihood with inline density evaluation (no temporaries)."""
    cdef Py_ssize_t T = y.shape[0]
    cdef Py_ssize_t k = beta0.shape[0]
    cdef double[:] xi = np.empty(k)
    cdef double[:] pred = np.empty(k)
    cdef double[:] ld = np.empty(k)
    cdef double[:] lnc = np.empty(k)
    cdef double[:] half_inv = np.empty(k)
    cdef Py_ssize_t t, i, j
    cdef double loglik = 0.0, mx, s, wt, resid
    for j in range(k):
        lnc[j] = -0.5 * log(2.0 * _PI * sigma2[j])
        half_inv[j] = 0.5 / sigma2[j]
        xi[j] = pi0[j]
    for t in range(T):
        for j in range(k):
            s = 0.0
            for i in range(k):
                s += trans[i, j] * xi[i]
            pred[j] = s
            resid = y[t] - beta0[j] - beta1[j] * x[t]
            ld[j] = lnc[j] - resid * resid * half_inv[j]
        mx = ld[0]
        for j in range(1, k):
            if ld[j] > mx:
                mx = ld[j]
        s = 0.0
        for j in range(k):
            wt = pred[j] * exp(ld[j] - mx)
            xi[j] = wt
            s += wt
        if not (s > 0.0) or not isfinite(s):
            raise ValueError(f"filter diverged at step {t}")
        loglik += mx + log(s)
        for j in range(k):
            xi[j] /= s
    return loglik


def tvc_filter(double[:] y, double[:] z, double q0, double q1, double r,
               double[:] m0, double[:, :] p0):
    cdef Py_ssize_t T = y.shape[0]
    means_arr = np.empty((T, 2))
    covs_arr = np.empty((T, 3))
    cdef double[:, :] means = means_arr
    cdef double[:, :] covs = covs_arr
    cdef double a0 = m0[0], a1 = m0[1]
    cdef double p00 = p0[0, 0], p01 = p0[0, 1], p11 = p0[1, 1]
    cdef double ll = 0.0, log2pi = log(2.0 * _PI)
    cdef double zt, pr00, pr01, pr11, u0, u1, s, e, k0, k1
    cdef Py_ssize_t t
    for t in range(T):
        zt = z[t]
        pr00 = p00 + q0
        pr01 = p01
        pr11 = p11 + q1
        u0 = pr00 + zt * pr01
        u1 = pr01 + zt * pr11
        s = u0 + zt * u1 + r
        if not (s > 0.0) or not isfinite(s):
            raise ValueError(f"filter diverged at step {t}")
        e = y[t] - (a0 + a1 * zt)
        ll += -0.5 * (log2pi + log(s) + e * e / s)
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
    return ll, means_arr, covs_arr
