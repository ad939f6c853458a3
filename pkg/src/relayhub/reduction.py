"""Kantorovich distances and fast forward selection of scenarios."""

from __future__ import annotations

import csv
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .network import Network
from .scenarios import Scenario, ScenarioSet
from .solver.simplex import LpStatus, simplex


@dataclass(frozen=True)
class DistanceWeights:
    demand: float = 1.0
    time: float = 1.0


def scenario_vectors(s: Scenario, network: Network) -> tuple[np.ndarray, np.ndarray]:
    return s.demand.astype(float).ravel(), s.travel_times(network).ravel()


def scenario_distance(s1: Scenario, s2: Scenario, network: Network, weights: DistanceWeights = DistanceWeights()) -> float:
    """Weighted Euclidean distance over stacked demand and travel times."""
    if s1.demand.shape != s2.demand.shape or s1.multipliers.shape != s2.multipliers.shape:
        raise ValueError(
            f"scenario shapes differ: demand {s1.demand.shape} vs {s2.demand.shape}, "
            f"times {s1.multipliers.shape} vs {s2.multipliers.shape}"
        )
    d1, t1 = scenario_vectors(s1, network)
    d2, t2 = scenario_vectors(s2, network)
    diff = np.concatenate([(d1 - d2) * weights.demand, (t1 - t2) * weights.time])
    return float(np.sqrt(diff @ diff))


def default_weights(scenarios: Sequence[Scenario], network: Network) -> DistanceWeights:
    """Scale each block by the inverse standard deviation of its entries
    across the whole set (1 when the block is constant)."""
    dem = np.stack([s.demand.astype(float).ravel() for s in scenarios])
    tim = np.stack([s.travel_times(network).ravel() for s in scenarios])
    sd, st = dem.std(), tim.std()
    return DistanceWeights(1.0 / sd if sd > 0 else 1.0, 1.0 / st if st > 0 else 1.0)


def distance_matrix(
    scenarios: Sequence[Scenario],
    network: Network,
    weights: DistanceWeights | None = None,
    workers: int = 1,
) -> np.ndarray:
    if weights is None:
        weights = default_weights(scenarios, network)
    X = np.stack(
        [np.concatenate([d * weights.demand, t * weights.time]) for d, t in (scenario_vectors(s, network) for s in scenarios)]
    )
    n = len(scenarios)

    def row(i):
        diff = X[i + 1 :] - X[i]
        return i, np.sqrt(np.einsum("ij,ij->i", diff, diff))

    c = np.zeros((n, n))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(row, range(n)))
    else:
        rows = [row(i) for i in range(n)]
    for i, r in rows:
        c[i, i + 1 :] = r
        c[i + 1 :, i] = r
    return c


def kantorovich_subset_distance(p: Sequence[float], selected: Sequence[int], c: np.ndarray) -> float:
    """Transport distance from the full measure to one supported on
    ``selected``: each dropped scenario moves to its nearest kept one."""
    sel = np.asarray(sorted(set(int(i) for i in selected)), dtype=np.int64)
    if sel.size == 0:
        raise ValueError("selected set must be non-empty")
    p = np.asarray(p, dtype=float)
    if sel.min() < 0 or sel.max() >= p.size:
        raise ValueError("selected index out of range")
    rest = np.setdiff1d(np.arange(p.size), sel)
    if rest.size == 0:
        return 0.0
    return float(p[rest] @ c[np.ix_(rest, sel)].min(axis=1))


def transport_distance(mu: Sequence[float], nu: Sequence[float], c: np.ndarray) -> float:
    """Optimal value of the discrete transportation LP between two measures
    (rows of ``c`` index ``mu``, columns index ``nu``)."""
    mu = np.asarray(mu, dtype=float)
    nu = np.asarray(nu, dtype=float)
    c = np.asarray(c, dtype=float)
    if c.shape != (mu.size, nu.size):
        raise ValueError("cost matrix shape does not match the measures")
    if (mu < 0).any() or (nu < 0).any() or abs(mu.sum() - 1) > 1e-9 or abs(nu.sum() - 1) > 1e-9:
        raise ValueError("both measures must be non-negative with total mass 1")
    m, n = c.shape
    rows = np.concatenate([np.repeat(np.arange(m), n), m + np.tile(np.arange(n), m)])
    cols = np.concatenate([np.arange(m * n), np.arange(m * n)])
    A = sp.csr_matrix((np.ones(2 * m * n), (rows, cols)), shape=(m + n, m * n))
    # one marginal row is redundant; dropping it keeps the basis nonsingular
    A = A[:-1]
    rhs = np.concatenate([mu, nu])[:-1]
    sol = simplex(c.ravel(), A, ["E"] * (m + n - 1), rhs, np.zeros(m * n), np.full(m * n, np.inf))
    if sol.status is not LpStatus.OPTIMAL:
        raise ValueError(f"transport LP not solvable: {sol.status.value}")
    return sol.objective


@dataclass
class Reduction:
    selected: list[int]  # in selection order
    probabilities: np.ndarray  # redistributed, aligned with ``selected``
    distance: float
    path: list[float]  # achieved distance after each pick

    def reduced_measure(self, n: int) -> np.ndarray:
        nu = np.zeros(n)
        nu[self.selected] = self.probabilities
        return nu


def ffs_reduce(p: Sequence[float], k: int, c: np.ndarray) -> Reduction:
    """Greedy fast forward selection of ``k`` scenarios.

    Each step adds the scenario that most lowers
    ``sum_j p_j * min(d_j, c[j, u])`` over unselected ``j``; ties go to the
    lowest index. Dropped probability mass moves to the nearest kept
    scenario (lowest index on ties).
    """
    p = np.asarray(p, dtype=float)
    c = np.asarray(c, dtype=float)
    n = p.size
    if not 1 <= k <= n:
        raise ValueError(f"target count k={k} outside [1, {n}]")
    selected: list[int] = []
    mask = np.zeros(n, dtype=bool)
    d = np.full(n, np.inf)
    path = []
    for _ in range(k):
        best_u, best_val = -1, np.inf
        for u in range(n):
            if mask[u]:
                continue
            others = ~mask
            others[u] = False
            val = float(p[others] @ np.minimum(d[others], c[others, u]))
            if val < best_val:
                best_u, best_val = u, val
        selected.append(best_u)
        mask[best_u] = True
        d = np.minimum(d, c[:, best_u])
        path.append(best_val)

    sel = np.array(selected)
    order = np.argsort(sel)
    probs = p[sel].copy()
    for j in np.flatnonzero(~mask):
        dist = c[j, sel]
        nearest = order[np.argmin(dist[order])]  # lowest scenario index on ties
        probs[nearest] += p[j]
    return Reduction(selected, probs, kantorovich_subset_distance(p, selected, c), path)


def reduce_scenario_set(
    sset: ScenarioSet,
    network: Network,
    k: int,
    weights: DistanceWeights | None = None,
    workers: int = 1,
) -> tuple[ScenarioSet, list[Reduction]]:
    """Reduce every season independently to ``k`` scenarios."""
    seasons, reports = [], []
    for scen in sset.seasons:
        w = weights if weights is not None else default_weights(scen, network)
        c = distance_matrix(scen, network, w, workers)
        red = ffs_reduce([s.probability for s in scen], k, c)
        kept = sorted(zip(red.selected, red.probabilities))
        seasons.append(tuple(scen[i].with_probability(float(q)) for i, q in kept))
        reports.append(red)
    meta = dict(sset.meta)
    meta["reduced_to"] = k
    return ScenarioSet(tuple(seasons), meta), reports


def reduction_report_csv(reports: Sequence[Reduction], sset: ScenarioSet | None = None) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["season", "selected", "probabilities", "distance"])
    for t, red in enumerate(reports):
        kept = sorted(zip(red.selected, red.probabilities))
        wr.writerow(
            [
                t,
                " ".join(str(i) for i, _ in kept),
                " ".join(repr(float(q)) for _, q in kept),
                repr(float(red.distance)),
            ]
        )
    return buf.getvalue()
