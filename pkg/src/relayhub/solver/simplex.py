"""Two-phase bounded revised simplex.

Works on ``min c'x  s.t.  A x (<=|=|>=) b,  lb <= x <= ub``. Internally every
column is shifted to a zero lower bound, fixed columns are folded into the
right-hand side, and each inequality row gets a slack. The basis inverse is
kept as a dense LU factorization plus a product-form eta file.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

FEAS_TOL = 1e-7
OPT_TOL = 1e-7
PIVOT_TOL = 1e-9
REFACTOR_EVERY = 50
DRIFT_TOL = 1e-8
BLAND_AFTER = 5000


class SolverError(RuntimeError):
    """Numerical breakdown inside the simplex method."""


class LpStatus(str, enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    ITERATION_LIMIT = "iteration_limit"


@dataclass
class LpSolution:
    status: LpStatus
    x: np.ndarray | None = None
    objective: float = np.nan
    duals: np.ndarray | None = None
    reduced_costs: np.ndarray | None = None
    iterations: int = 0
    phase1_iterations: int = 0
    bland_used: bool = False

    @property
    def optimal(self) -> bool:
        return self.status is LpStatus.OPTIMAL


@dataclass
class _Factor:
    """B^{-1} as LU(B0) followed by eta transformations."""

    lu: tuple
    etas: list = field(default_factory=list)

    def ftran(self, v):
        x = sla.lu_solve(self.lu, v, check_finite=False)
        for r, w in self.etas:
            xr = x[r] / w[r]
            x -= xr * w
            x[r] = xr
        return x

    def btran(self, v):
        v = v.copy()
        for r, w in reversed(self.etas):
            v[r] = (v[r] - (w @ v - w[r] * v[r])) / w[r]
        return sla.lu_solve(self.lu, v, trans=1, check_finite=False)


def _factor(Bmat) -> _Factor:
    with warnings.catch_warnings():
        warnings.simplefilter("error", sla.LinAlgWarning)
        try:
            lu = sla.lu_factor(Bmat, check_finite=False)
        except (sla.LinAlgWarning, ValueError) as exc:
            raise SolverError(f"basis factorization failed: {exc}") from exc
    diag = np.abs(np.diag(lu[0]))
    if diag.size and diag.min() < 1e-11 * max(1.0, diag.max()):
        raise SolverError(f"singular basis (min |U_ii| = {diag.min():.3e})")
    return _Factor(lu)


class _Bounded:
    """Core bounded-variable primal simplex on ``A x = b, 0 <= x <= u``."""

    def __init__(self, A: sp.csc_matrix, b, u, max_iter):
        self.A = A
        self.b = b
        self.u = u
        self.m, self.n = A.shape
        self.max_iter = max_iter
        self.iterations = 0
        self.degenerate = 0
        self.bland = False

    def column(self, j):
        col = np.zeros(self.m)
        lo, hi = self.A.indptr[j], self.A.indptr[j + 1]
        col[self.A.indices[lo:hi]] = self.A.data[lo:hi]
        return col

    def basis_matrix(self):
        return self.A[:, self.basis].toarray()

    def refactor(self):
        self.factor = _factor(self.basis_matrix())
        self.since_refactor = 0
        self.recompute_xb()

    def recompute_xb(self):
        xn = np.where(self.at_upper, self.u, 0.0)
        xn[self.basis] = 0.0
        self.rhs_n = self.b - self.A @ xn
        self.xb = self.factor.ftran(self.rhs_n)

    def values(self):
        x = np.where(self.at_upper, self.u, 0.0)
        x[self.basis] = self.xb
        return x

    def run(self, c, allowed):
        """Iterate to optimality for cost ``c``; ``allowed`` masks columns
        that may enter the basis."""
        m = self.m
        while True:
            if self.iterations >= self.max_iter:
                return LpStatus.ITERATION_LIMIT
            y = self.factor.btran(c[self.basis])
            d = c - self.A.T @ y
            self.y, self.d = y, d
            cand = allowed & ~self.is_basic & (
                ((~self.at_upper) & (d < -OPT_TOL)) | (self.at_upper & (d > OPT_TOL))
            )
            idx = np.flatnonzero(cand)
            if idx.size == 0:
                return LpStatus.OPTIMAL
            q = idx[0] if self.bland else idx[np.argmax(np.abs(d[idx]))]
            s = 1.0 if not self.at_upper[q] else -1.0

            w = self.factor.ftran(self.column(q))
            # x_B(theta) = x_B - s * theta * w
            delta = s * w
            theta = self.u[q]
            leave = -1
            lb_hit = delta > PIVOT_TOL
            ub_hit = (delta < -PIVOT_TOL) & np.isfinite(self.u[self.basis])
            ratios = np.full(m, np.inf)
            ratios[lb_hit] = np.maximum(self.xb[lb_hit], 0.0) / delta[lb_hit]
            ub_b = self.u[self.basis]
            ratios[ub_hit] = np.maximum(ub_b[ub_hit] - self.xb[ub_hit], 0.0) / -delta[ub_hit]
            rmin = ratios.min() if m else np.inf
            if rmin < theta:
                ties = np.flatnonzero(ratios <= rmin + 1e-12)
                if self.bland:
                    leave = ties[np.argmin(self.basis[ties])]
                else:
                    leave = ties[np.argmax(np.abs(delta[ties]))]
                theta = ratios[leave]
            if not np.isfinite(theta):
                self.unbounded_column = q
                return LpStatus.UNBOUNDED

            self.iterations += 1
            if theta <= 1e-12:
                self.degenerate += 1
                if self.degenerate >= BLAND_AFTER:
                    self.bland = True

            self.xb -= theta * delta
            if leave < 0:
                # bound flip, basis unchanged
                self.at_upper[q] = not self.at_upper[q]
                continue
            p = self.basis[leave]
            to_upper = delta[leave] < 0
            entering_value = theta if s > 0 else self.u[q] - theta
            self.xb[leave] = entering_value
            self.is_basic[p] = False
            self.at_upper[p] = bool(to_upper)
            self.is_basic[q] = True
            self.at_upper[q] = False
            self.basis[leave] = q
            self.factor.etas.append((leave, w))
            self.since_refactor += 1
            if self.since_refactor >= REFACTOR_EVERY:
                self.refactor()
            elif self.since_refactor % 10 == 0:
                resid = self.A[:, self.basis] @ self.xb - self.rhs_n_current()
                if np.abs(resid).max(initial=0.0) > DRIFT_TOL * max(1.0, np.abs(self.b).max(initial=0.0)):
                    self.refactor()

    def rhs_n_current(self):
        xn = np.where(self.at_upper, self.u, 0.0)
        xn[self.basis] = 0.0
        return self.b - self.A @ xn


def _as_csr(A, n):
    if A is None:
        return sp.csr_matrix((0, n))
    return sp.csr_matrix(A, dtype=float)


def simplex(c, A, senses, rhs, lb, ub, max_iter: int | None = None) -> LpSolution:
    """Solve an LP in general row/bound form with the two-phase method.

    ``senses`` holds one of ``'L'``, ``'E'``, ``'G'`` per row. Infinite
    lower bounds are allowed (the column is mirrored or split).
    """
    c = np.asarray(c, dtype=float)
    n = c.size
    A = _as_csr(A, n)
    m = A.shape[0]
    rhs = np.asarray(rhs, dtype=float).reshape(m)
    senses = np.asarray([str(s).upper()[0] for s in senses]) if m else np.array([], dtype="<U1")
    lb = np.asarray(lb, dtype=float).copy()
    ub = np.asarray(ub, dtype=float).copy()
    if not (np.isfinite(c).all() and np.isfinite(A.data).all() and np.isfinite(rhs).all()):
        raise SolverError("non-finite coefficient in LP data")
    if (lb > ub + FEAS_TOL).any():
        return LpSolution(LpStatus.INFEASIBLE)

    # column transforms: x = shift + sign * z  (plus a split part for free columns)
    sign = np.ones(n)
    shift = np.where(np.isfinite(lb), lb, 0.0)
    upper = ub - lb
    mirror = ~np.isfinite(lb) & np.isfinite(ub)
    sign[mirror] = -1.0
    shift[mirror] = ub[mirror]
    upper[mirror] = np.inf
    free = ~np.isfinite(lb) & ~np.isfinite(ub)
    upper[free] = np.inf
    fixed = np.isfinite(upper) & (upper <= 0.0)
    fixed[free | mirror] = False

    keep = np.flatnonzero(~fixed)
    free_kept = np.flatnonzero(free[keep])
    Acsc = A.tocsc()
    b = rhs - A @ shift
    Ak = Acsc[:, keep] @ sp.diags(sign[keep])
    ck = c[keep] * sign[keep]
    uk = upper[keep]
    blocks = [Ak]
    costs = [ck]
    uppers = [uk]
    if free_kept.size:
        blocks.append(-Ak[:, free_kept])
        costs.append(-ck[free_kept])
        uppers.append(np.full(free_kept.size, np.inf))
    n_struct = sum(blk.shape[1] for blk in blocks)

    slack_rows = np.flatnonzero(senses != "E")
    if slack_rows.size:
        coef = np.where(senses[slack_rows] == "L", 1.0, -1.0)
        S = sp.csc_matrix((coef, (slack_rows, np.arange(slack_rows.size))), shape=(m, slack_rows.size))
        blocks.append(S)
        costs.append(np.zeros(slack_rows.size))
        uppers.append(np.full(slack_rows.size, np.inf))
    slack_of_row = np.full(m, -1)
    slack_of_row[slack_rows] = n_struct + np.arange(slack_rows.size)
    n_real = n_struct + slack_rows.size

    # crash basis: slack where its sign matches the residual, artificial elsewhere
    basis = np.empty(m, dtype=np.int64)
    art_rows, art_sign = [], []
    for i in range(m):
        j = slack_of_row[i]
        if j >= 0:
            coef_i = 1.0 if senses[i] == "L" else -1.0
            if coef_i * b[i] >= 0:
                basis[i] = j
                continue
        art_rows.append(i)
        art_sign.append(1.0 if b[i] >= 0 else -1.0)
    n_art = len(art_rows)
    if n_art:
        Art = sp.csc_matrix((art_sign, (art_rows, np.arange(n_art))), shape=(m, n_art))
        blocks.append(Art)
        costs.append(np.zeros(n_art))
        uppers.append(np.full(n_art, np.inf))
        basis[art_rows] = n_real + np.arange(n_art)

    Afull = sp.hstack(blocks, format="csc") if blocks else sp.csc_matrix((m, 0))
    cfull = np.concatenate(costs) if costs else np.zeros(0)
    ufull = np.concatenate(uppers) if uppers else np.zeros(0)
    ntot = Afull.shape[1]
    if max_iter is None:
        max_iter = 50 * (m + ntot) + 10000

    core = _Bounded(Afull, b, ufull, max_iter)
    core.basis = basis
    core.is_basic = np.zeros(ntot, dtype=bool)
    core.is_basic[basis] = True
    core.at_upper = np.zeros(ntot, dtype=bool)
    core.refactor()

    allowed = np.ones(ntot, dtype=bool)
    phase1_iters = 0
    if n_art:
        c1 = np.zeros(ntot)
        c1[n_real:] = 1.0
        status = core.run(c1, allowed)
        phase1_iters = core.iterations
        if status is LpStatus.ITERATION_LIMIT:
            return LpSolution(status, iterations=core.iterations)
        infeas = core.values()[n_real:].sum()
        if infeas > FEAS_TOL * max(1.0, np.abs(b).max(initial=0.0)):
            return LpSolution(LpStatus.INFEASIBLE, iterations=core.iterations, phase1_iterations=phase1_iters)
        # artificials stay only as basic placeholders pinned at zero
        core.u[n_real:] = 0.0
        allowed[n_real:] = False
        core.at_upper[n_real:] = False
        core.xb[core.basis >= n_real] = np.clip(core.xb[core.basis >= n_real], 0.0, 0.0)

    status = core.run(cfull, allowed)
    if status is not LpStatus.OPTIMAL:
        return LpSolution(status, iterations=core.iterations, phase1_iterations=phase1_iters, bland_used=core.bland)

    core.refactor()
    z = core.values()
    y = core.factor.btran(cfull[core.basis])
    xk = z[: keep.size].copy()
    if free_kept.size:
        xk[free_kept] -= z[keep.size : keep.size + free_kept.size]
    x = shift.copy()
    x[keep] += sign[keep] * xk
    x[fixed] = shift[fixed]
    redcost = c - A.T @ y
    return LpSolution(
        LpStatus.OPTIMAL,
        x=x,
        objective=float(c @ x),
        duals=y,
        reduced_costs=redcost,
        iterations=core.iterations,
        phase1_iterations=phase1_iters,
        bland_used=core.bland,
    )


def solve_lp(problem, lb=None, ub=None, max_iter: int | None = None) -> LpSolution:
    """Solve the LP relaxation of ``problem`` (integrality ignored).

    ``problem`` needs ``c``, ``A``, ``senses``, ``rhs``, ``lb`` and ``ub``
    attributes; ``lb``/``ub`` arguments override the stored bounds.
    """
    return simplex(
        problem.c,
        problem.A,
        problem.senses,
        problem.rhs,
        problem.lb if lb is None else lb,
        problem.ub if ub is None else ub,
        max_iter=max_iter,
    )


def dual_bound(c, A, senses, rhs, lb, ub, y) -> float:
    """Lagrangian dual value at row multipliers ``y``; -inf if a sign or
    bound requirement is violated. Weak duality: never above the primal
    optimum."""
    A = _as_csr(A, len(c))
    y = np.asarray(y, dtype=float).copy()
    senses = np.asarray([str(s).upper()[0] for s in senses])
    # row-sign feasibility for a minimization: L rows need y <= 0, G rows y >= 0
    tol = 10 * OPT_TOL
    if ((senses == "L") & (y > tol)).any() or ((senses == "G") & (y < -tol)).any():
        return -np.inf
    y[(senses == "L") & (y > 0)] = 0.0
    y[(senses == "G") & (y < 0)] = 0.0
    d = np.asarray(c, dtype=float) - A.T @ y
    lb = np.asarray(lb, dtype=float)
    ub = np.asarray(ub, dtype=float)
    total = float(np.asarray(rhs, dtype=float) @ y)
    for dj, lo, hi in zip(d, lb, ub):
        if dj > 0:
            if not np.isfinite(lo):
                if dj > tol:
                    return -np.inf
                continue
            total += dj * lo
        elif dj < 0:
            if not np.isfinite(hi):
                if dj < -tol:
                    return -np.inf
                continue
            total += dj * hi
    return total
