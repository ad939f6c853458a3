"""Best-bound branch and bound over the integer columns of a MILP."""

from __future__ import annotations

import heapq
import logging
import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .simplex import LpStatus, solve_lp

log = logging.getLogger(__name__)

INT_TOL = 1e-6


@dataclass
class BnbReport:
    status: str  # optimal | gap_limit | node_limit | time_limit | infeasible | unbounded
    incumbent: float = math.inf
    bound: float = -math.inf
    gap: float = math.inf
    nodes: int = 0
    wall_time: float = 0.0
    backend: str = "bnb"
    lines: list[str] = field(default_factory=list, repr=False)

    @property
    def has_solution(self) -> bool:
        return math.isfinite(self.incumbent)

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "incumbent": self.incumbent if self.has_solution else None,
            "bound": self.bound if math.isfinite(self.bound) else None,
            "gap": self.gap if math.isfinite(self.gap) else None,
            "nodes": self.nodes,
            "wall_time": self.wall_time,
            "backend": self.backend,
        }


def relative_gap(incumbent: float, bound: float) -> float:
    if not math.isfinite(incumbent):
        return math.inf
    return max(0.0, incumbent - bound) / max(1.0, abs(incumbent))


def branching_column(x: np.ndarray, int_cols: np.ndarray, tol: float = INT_TOL) -> int:
    """Integer column whose fractional part is closest to 0.5; -1 if the
    point is integral. Ties go to the lowest column index."""
    vals = x[int_cols]
    frac = vals - np.floor(vals)
    fractional = (frac > tol) & (frac < 1 - tol)
    if not fractional.any():
        return -1
    # rounded so that values mirrored around 0.5 tie despite float noise
    score = np.where(fractional, np.round(np.abs(frac - 0.5), 12), np.inf)
    return int(int_cols[np.argmin(score)])


def solve_milp(
    instance,
    rel_gap: float = 1e-6,
    node_limit: int | None = None,
    time_limit: float | None = None,
    backend: str = "bnb",
    on_incumbent: Callable[[np.ndarray, float], None] | None = None,
    echo: Callable[[str], None] | None = None,
):
    """Minimize ``instance`` to relative gap ``rel_gap``.

    Returns ``(BnbReport, x)`` where ``x`` is the best integer-feasible
    column vector found (None when there is none). ``backend="highs"``
    hands the whole model to HiGHS through SciPy instead of the bundled
    simplex-based search.
    """
    if backend == "highs":
        return _solve_highs(instance, rel_gap, node_limit, time_limit, echo)
    if backend != "bnb":
        raise ValueError(f"unknown MILP backend {backend!r}")

    start = time.perf_counter()
    int_cols = np.flatnonzero(instance.integer)
    report = BnbReport(status="optimal")

    def emit(node, bound, inc):
        line = f"BNB {node} {bound:.10g} {inc:.10g} {relative_gap(inc, bound):.6g}"
        report.lines.append(line)
        log.debug(line)
        if echo is not None:
            echo(line)

    lb0 = np.asarray(instance.lb, dtype=float).copy()
    ub0 = np.asarray(instance.ub, dtype=float).copy()
    lb0[int_cols] = np.ceil(lb0[int_cols] - INT_TOL)
    ub0[int_cols] = np.floor(ub0[int_cols] + INT_TOL)

    root = solve_lp(instance, lb0, ub0)
    report.nodes = 1
    if root.status is LpStatus.INFEASIBLE:
        report.status = "infeasible"
        report.wall_time = time.perf_counter() - start
        emit(1, math.inf, math.inf)
        return report, None
    if root.status is LpStatus.UNBOUNDED:
        report.status = "unbounded"
        report.wall_time = time.perf_counter() - start
        return report, None
    if root.status is not LpStatus.OPTIMAL:
        raise RuntimeError(f"root LP ended with status {root.status.value}")

    best_x = None
    incumbent = math.inf
    counter = 0
    heap = [(root.objective, counter, lb0, ub0, root.x)]

    def prune_value(inc):
        # nodes whose bound cannot improve the incumbent beyond the gap target
        return inc - rel_gap * max(1.0, abs(inc))

    stopped = None
    while heap:
        bound = heap[0][0]
        report.bound = min(bound, incumbent)
        if relative_gap(incumbent, bound) <= rel_gap:
            break
        if node_limit is not None and report.nodes >= node_limit:
            stopped = "node_limit"
            break
        if time_limit is not None and time.perf_counter() - start > time_limit:
            stopped = "time_limit"
            break
        obj, _, lb, ub, x = heapq.heappop(heap)
        if obj >= prune_value(incumbent):
            continue
        j = branching_column(x, int_cols)
        if j < 0:
            # integral LP optimum
            if obj < incumbent:
                incumbent, best_x = obj, _round_integers(x, int_cols)
                if on_incumbent is not None:
                    on_incumbent(best_x, incumbent)
            emit(report.nodes, heap[0][0] if heap else obj, incumbent)
            continue
        for child_lb, child_ub in _children(lb, ub, j, x[j]):
            sol = solve_lp(instance, child_lb, child_ub)
            report.nodes += 1
            if sol.status is not LpStatus.OPTIMAL:
                continue
            if sol.objective >= prune_value(incumbent):
                continue
            if branching_column(sol.x, int_cols) < 0:
                if sol.objective < incumbent:
                    incumbent, best_x = sol.objective, _round_integers(sol.x, int_cols)
                    if on_incumbent is not None:
                        on_incumbent(best_x, incumbent)
                continue
            counter += 1
            heapq.heappush(heap, (sol.objective, counter, child_lb, child_ub, sol.x))
        emit(report.nodes, min(heap[0][0], incumbent) if heap else incumbent, incumbent)

    report.incumbent = incumbent
    report.bound = min(heap[0][0], incumbent) if heap else incumbent
    if not heap and not math.isfinite(incumbent):
        report.status = "infeasible"
        report.bound = math.inf
    else:
        report.gap = relative_gap(incumbent, report.bound)
        if stopped:
            report.status = stopped
        elif report.gap > 0 and heap:
            report.status = "gap_limit"
    report.wall_time = time.perf_counter() - start
    emit(report.nodes, report.bound, incumbent)
    return report, best_x


def _children(lb, ub, j, value):
    down_ub = ub.copy()
    down_ub[j] = math.floor(value)
    up_lb = lb.copy()
    up_lb[j] = math.ceil(value)
    return ((lb, down_ub), (up_lb, ub))


def _round_integers(x, int_cols):
    x = x.copy()
    x[int_cols] = np.round(x[int_cols])
    return x


def _solve_highs(instance, rel_gap, node_limit, time_limit, echo):
    from scipy.optimize import Bounds, LinearConstraint, milp

    start = time.perf_counter()
    senses = np.asarray(instance.senses)
    rhs = np.asarray(instance.rhs, dtype=float)
    row_lo = np.where(senses == "L", -np.inf, rhs)
    row_hi = np.where(senses == "G", np.inf, rhs)
    options = {"mip_rel_gap": rel_gap, "disp": False, "presolve": True}
    if time_limit is not None:
        options["time_limit"] = float(time_limit)
    if node_limit is not None:
        options["node_limit"] = int(node_limit)
    res = milp(
        c=instance.c,
        constraints=LinearConstraint(instance.A, row_lo, row_hi),
        integrality=instance.integer.astype(np.int64),
        bounds=Bounds(instance.lb, instance.ub),
        options=options,
    )
    report = BnbReport(status="optimal", backend="highs")
    report.nodes = int(getattr(res, "mip_node_count", 0) or 0)
    report.wall_time = time.perf_counter() - start
    if res.x is None:
        report.status = {2: "infeasible", 3: "unbounded", 1: "time_limit"}.get(res.status, "infeasible")
        return report, None
    report.incumbent = float(res.fun)
    bound = getattr(res, "mip_dual_bound", None)
    report.bound = float(bound) if bound is not None and np.isfinite(bound) else report.incumbent
    report.gap = relative_gap(report.incumbent, report.bound)
    if res.status == 1:
        report.status = "time_limit" if report.gap > rel_gap else "optimal"
    elif report.gap > rel_gap:
        report.status = "gap_limit"
    line = f"BNB {report.nodes} {report.bound:.10g} {report.incumbent:.10g} {report.gap:.6g}"
    report.lines.append(line)
    if echo is not None:
        echo(line)
    return report, np.asarray(res.x, dtype=float)
