"""Self-contained linear-program solver.

Solves ``min c'x  s.t.  Ax {<=,=,>=} b,  l <= x <= u`` with a bounded-variable
revised simplex (Dantzig pricing, Bland's-rule fallback on degenerate streaks)
and a dual simplex for warm re-solves after rhs/bound changes.  The hot
pivoting loops live in :mod:`mefkit._kernels`; refactorization goes through
LAPACK.

Dual sign convention (minimization): the reported dual ``y_i`` is the
sensitivity of the optimal objective to the row's rhs, so duals of ``<=`` rows
are <= 0, duals of ``>=`` rows are >= 0, and equality rows are unrestricted.

Determinism: all tie-breaks resolve to the lowest variable index, so a given
kernel backend produces bit-identical output for identical input.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from ._kernels import AT_LOWER, AT_UPPER, BASIC, FREE, ITER_LIMIT, OPTIMAL, SINGULAR, UNBOUNDED

INF = math.inf

#: pivots between refactorizations of the basis inverse
_REFACTOR_EVERY = 256

#: relative feasibility tolerance per row, 1e-8 * (1 + |rhs|)
FEAS_TOL = 1e-8

#: optimality tolerance on reduced costs
OPT_TOL = 1e-9

SENSES = ("<=", "=", ">=")


class LpError(Exception):
    """Raised on numerical breakdown; never a silent wrong answer."""


@dataclass
class LinearProgram:
    """Row-wise LP model; variables default to bounds [0, inf)."""

    costs: list = field(default_factory=list)
    lower: list = field(default_factory=list)
    upper: list = field(default_factory=list)
    var_names: list = field(default_factory=list)
    rows: list = field(default_factory=list)  # (coeff dict, sense, rhs)
    row_names: list = field(default_factory=list)

    def add_var(self, name=None, lower=0.0, upper=INF, cost=0.0) -> int:
        if not lower <= upper:
            raise ValueError(f"variable {name or len(self.costs)}: lower > upper")
        self.costs.append(float(cost))
        self.lower.append(float(lower))
        self.upper.append(float(upper))
        self.var_names.append(name if name is not None else f"x{len(self.costs) - 1}")
        return len(self.costs) - 1

    def add_row(self, coeffs, sense: str, rhs: float, name=None) -> int:
        if sense not in SENSES:
            raise ValueError(f"unknown sense {sense!r}")
        if not math.isfinite(rhs):
            raise ValueError("rhs must be finite")
        row = {}
        for j, a in coeffs.items() if isinstance(coeffs, dict) else coeffs:
            if not 0 <= j < len(self.costs):
                raise ValueError(f"row references undeclared variable {j}")
            if a != 0.0:
                row[j] = row.get(j, 0.0) + float(a)
        self.rows.append((row, sense, float(rhs)))
        self.row_names.append(name if name is not None else f"r{len(self.rows) - 1}")
        return len(self.rows) - 1

    @property
    def n_vars(self) -> int:
        return len(self.costs)

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    def dump(self) -> str:
        """Plain-text form (objective, rows, bounds) for external cross-checks."""
        out = ["minimize"]
        terms = [f"{self.costs[j]!r} {self.var_names[j]}"
                 for j in range(self.n_vars) if self.costs[j] != 0.0]
        out.append("  obj: " + (" + ".join(terms) if terms else "0"))
        out.append("subject to")
        for i, (row, sense, rhs) in enumerate(self.rows):
            terms = [f"{row[j]!r} {self.var_names[j]}" for j in sorted(row)]
            out.append(f"  {self.row_names[i]}: " + " + ".join(terms) +
                       f" {sense} {rhs!r}")
        out.append("bounds")
        for j in range(self.n_vars):
            out.append(f"  {self.lower[j]!r} <= {self.var_names[j]} <= {self.upper[j]!r}")
        out.append("end")
        return "\n".join(out) + "\n"


@dataclass
class LpSolution:
    status: str  # optimal | infeasible | unbounded
    x: np.ndarray | None
    duals: np.ndarray | None
    objective_value: float | None
    iterations: int
    basis: tuple | None = None  # warm-start token (vstat, basis arrays)


class Solver:
    """Standardized simplex workspace over one LinearProgram.

    The workspace supports rhs/bound mutation followed by a warm ``resolve``
    (dual simplex plus a primal clean-up pass), which is what the rolling
    dispatch and the +1 MWh perturbation engine use.
    """

    def __init__(self, lp: LinearProgram):
        n, m = lp.n_vars, lp.n_rows
        self.n = n
        self.m = m
        self.ncols = n + 2 * m  # structurals, slacks, artificials

        cols = [[] for _ in range(self.ncols)]
        for i, (row, _, _) in enumerate(lp.rows):
            for j, a in row.items():
                cols[j].append((i, a))
        for i in range(m):
            cols[n + i].append((i, 1.0))        # slack
            cols[n + m + i].append((i, 1.0))    # artificial

        nnz = sum(len(cl) for cl in cols)
        self.indptr = np.zeros(self.ncols + 1, dtype=np.int64)
        self.indices = np.zeros(nnz, dtype=np.int64)
        self.data = np.zeros(nnz, dtype=np.float64)
        self.colind = np.zeros(nnz, dtype=np.int64)
        p = 0
        for j, cl in enumerate(cols):
            self.indptr[j] = p
            for (i, a) in cl:
                self.indices[p] = i
                self.data[p] = a
                self.colind[p] = j
                p += 1
        self.indptr[self.ncols] = p

        self.c = np.zeros(self.ncols)
        self.c[:n] = lp.costs
        self.lo = np.zeros(self.ncols)
        self.up = np.zeros(self.ncols)
        self.lo[:n] = lp.lower
        self.up[:n] = lp.upper
        self.b = np.array([rhs for (_, _, rhs) in lp.rows], dtype=np.float64)
        self.senses = [sense for (_, sense, _) in lp.rows]
        for i, sense in enumerate(self.senses):
            if sense == "<=":
                self.lo[n + i], self.up[n + i] = 0.0, INF
            elif sense == ">=":
                self.lo[n + i], self.up[n + i] = -INF, 0.0
            else:
                self.lo[n + i] = self.up[n + i] = 0.0
        # artificials stay locked at zero outside phase 1
        self.lo[n + m:] = 0.0
        self.up[n + m:] = 0.0

        self.vstat = np.zeros(self.ncols, dtype=np.int8)
        self.basis = np.zeros(m, dtype=np.int64)
        self.binv = np.eye(m)
        self.x = np.zeros(self.ncols)
        self._factorized = False
        self.total_pivots = 0

    # -- mutation introduces a stale basis; resolve() repairs it ----------

    def set_rhs(self, row: int, value: float) -> None:
        self.b[row] = float(value)

    def bump_rhs(self, row: int, delta: float) -> None:
        self.b[row] += delta

    def set_var_bounds(self, j: int, lower: float, upper: float) -> None:
        if not lower <= upper:
            raise ValueError("lower > upper")
        self.lo[j] = lower
        self.up[j] = upper

    # -- basis management ---------------------------------------------------

    def _default_status(self, j: int) -> int:
        if math.isfinite(self.lo[j]):
            return AT_LOWER
        if math.isfinite(self.up[j]):
            return AT_UPPER
        return FREE

    def _factorize(self) -> None:
        bmat = np.zeros((self.m, self.m))
        for r, j in enumerate(self.basis):
            p0, p1 = self.indptr[j], self.indptr[j + 1]
            bmat[self.indices[p0:p1], r] = self.data[p0:p1]
        try:
            self.binv = np.linalg.inv(bmat)
        except np.linalg.LinAlgError as exc:
            raise LpError(
                f"singular basis after {self.total_pivots} pivots") from exc
        self._factorized = True

    def _run(self, loop, c) -> int:
        """Drive a kernel loop with periodic refactorization."""
        impl = _kernels.impl
        singular_retries = 0
        max_total = 2000 + 40 * (self.m + self.n)
        done = 0
        while True:
            status, iters = loop(
                self.indptr, self.indices, self.data, self.colind, c,
                self.lo, self.up, self.b, self.vstat, self.basis, self.binv,
                self.x, _REFACTOR_EVERY)
            done += iters
            self.total_pivots += iters
            if status in (OPTIMAL, UNBOUNDED):
                return status
            if status == SINGULAR:
                singular_retries += 1
                if singular_retries > 3:
                    raise LpError(
                        f"numerical breakdown after {self.total_pivots} pivots")
                self._factorize()
                continue
            singular_retries = 0
            if done > max_total:
                raise LpError(
                    f"pivot limit exceeded after {self.total_pivots} pivots")
            self._factorize()  # ITER_LIMIT: refresh and continue

    def _row_residuals(self) -> np.ndarray:
        xn = self.x.copy()
        contrib = self.data * xn[self.colind]
        lhs = np.bincount(self.indices, weights=contrib, minlength=self.m)
        return np.abs(lhs - self.b)

    # -- solve paths ---------------------------------------------------------

    def solve(self, warm: tuple | None = None) -> LpSolution:
        if warm is not None:
            try:
                return self._solve_warm(warm)
            except LpError:
                pass  # fall back to a cold solve
        return self._solve_cold()

    def _solve_cold(self) -> LpSolution:
        n, m = self.n, self.m
        impl = _kernels.impl
        for j in range(n + m):
            self.vstat[j] = self._default_status(j)
        self.vstat[n + m:] = BASIC
        self.basis[:] = np.arange(n + m, n + m + m)
        self.binv = np.eye(m)

        # residuals with every structural/slack at its bound decide the
        # artificial signs for phase 1
        self.x[:] = 0.0
        lowered = self.vstat[:n + m] == AT_LOWER
        raised = self.vstat[:n + m] == AT_UPPER
        self.x[:n + m][lowered] = self.lo[:n + m][lowered]
        self.x[:n + m][raised] = self.up[:n + m][raised]
        contrib = self.data * self.x[self.colind]
        resid = self.b - np.bincount(self.indices, weights=contrib, minlength=m)

        c1 = np.zeros(self.ncols)
        for i in range(m):
            ja = n + m + i
            if resid[i] >= 0.0:
                self.lo[ja], self.up[ja], c1[ja] = 0.0, INF, 1.0
            else:
                self.lo[ja], self.up[ja], c1[ja] = -INF, 0.0, -1.0

        status = self._run(impl.primal_loop, c1)
        if status == UNBOUNDED:  # cannot happen: phase-1 objective is bounded below
            raise LpError("phase 1 reported unbounded")
        art = self.x[n + m:]
        tol = FEAS_TOL * (1.0 + np.abs(self.b))
        if np.any(np.abs(art) > tol):
            return LpSolution("infeasible", None, None, None, self.total_pivots)

        self.lo[n + m:] = 0.0
        self.up[n + m:] = 0.0
        status = self._run(impl.primal_loop, self.c)
        if status == UNBOUNDED:
            return LpSolution("unbounded", None, None, None, self.total_pivots)
        return self._extract()

    def _solve_warm(self, warm: tuple) -> LpSolution:
        vstat, basis = warm
        if vstat.size != self.ncols or basis.size != self.m:
            raise LpError("warm basis has wrong shape")
        self.vstat[:] = vstat
        self.basis[:] = basis
        self._factorize()
        return self.resolve()

    def resolve(self) -> LpSolution:
        """Dual re-solve from the current basis after rhs/bound mutations."""
        impl = _kernels.impl
        if not self._factorized:
            self._factorize()
        status = self._run(impl.dual_loop, self.c)
        if status == UNBOUNDED:
            return LpSolution("infeasible", None, None, None, self.total_pivots)
        # primal clean-up certifies optimality (no-op when duals were feasible)
        status = self._run(impl.primal_loop, self.c)
        if status == UNBOUNDED:
            return LpSolution("unbounded", None, None, None, self.total_pivots)
        return self._extract()

    def _extract(self) -> LpSolution:
        # fresh factorization bounds accumulated update drift before reporting
        self._factorize()
        _kernels.impl.recompute_basics(
            self.indptr, self.indices, self.data, self.colind, self.lo, self.up,
            self.b, self.vstat, self.basis, self.binv, self.x)
        resid = self._row_residuals()
        tol = FEAS_TOL * (1.0 + np.abs(self.b))
        if np.any(resid > 10.0 * tol):
            raise LpError(
                f"feasibility drift after {self.total_pivots} pivots")
        x = self.x[: self.n].copy()
        y = self.binv.T @ self.c[self.basis]
        obj = float(np.dot(self.c[: self.n], x))
        return LpSolution("optimal", x, y.copy(), obj, self.total_pivots,
                          basis=(self.vstat.copy(), self.basis.copy()))

    # -- sensitivity fast path (used by the +1 MWh engine) --------------------

    def freeze(self) -> tuple:
        return (self.vstat.copy(), self.basis.copy(), self.binv.copy(),
                self.x.copy(), self.b.copy())

    def restore(self, snap: tuple) -> None:
        vstat, basis, binv, x, b = snap
        self.vstat[:] = vstat
        self.basis[:] = basis
        self.binv[:] = binv
        self.x[:] = x
        self.b[:] = b
        self._factorized = True

    def try_rhs_bump(self, row: int, delta: float):
        """Exact re-solve of a single-rhs bump when the basis stays optimal.

        Returns the new full variable vector, or None when some basic variable
        would leave its bounds (caller must pivot via resolve()).
        """
        shift = delta * self.binv[:, row]
        xb = self.x[self.basis] + shift
        lob = self.lo[self.basis]
        upb = self.up[self.basis]
        tol = FEAS_TOL * (1.0 + np.abs(self.b[row]))
        if np.any(xb < lob - tol) or np.any(xb > upb + tol):
            return None
        x = self.x.copy()
        x[self.basis] = xb
        return x


def solve(lp: LinearProgram, warm: tuple | None = None) -> LpSolution:
    """Solve a LinearProgram; deterministic for a fixed kernel backend."""
    return Solver(lp).solve(warm=warm)


def dual_objective(lp: LinearProgram, sol: LpSolution) -> float:
    """Dual objective value b'y + sum of bound terms; equals the primal
    objective at optimality (strong duality check)."""
    if sol.status != "optimal":
        raise ValueError("dual objective requires an optimal solution")
    y = sol.duals
    total = float(np.dot([r for (_, _, r) in lp.rows], y))
    # reduced costs of structural variables
    d = np.array(lp.costs, dtype=float)
    for i, (row, _, _) in enumerate(lp.rows):
        for j, a in row.items():
            d[j] -= a * y[i]
    for j in range(lp.n_vars):
        if d[j] > 0 and math.isfinite(lp.lower[j]):
            total += d[j] * lp.lower[j]
        elif d[j] < 0 and math.isfinite(lp.upper[j]):
            total += d[j] * lp.upper[j]
    return total
