"""Demand and hub-disruption scenario generation."""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .network import Horizon, Network

DEMAND_STREAM = 0
DISRUPTION_STREAM = 1
SCHEMA = "relayhub.scenarios/1"


def poisson_sample(lam: float, rng: np.random.Generator) -> int:
    if lam < 0:
        raise ValueError(f"Poisson rate must be non-negative, got {lam}")
    return int(rng.poisson(lam))


def scenario_rng(seed: int, stream: int, index: int) -> np.random.Generator:
    """Independent generator for one (stream, scenario index) pair."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(stream, index)))


def period_months(horizon: Horizon) -> np.ndarray:
    """Calendar month (0-11) of every operational period.

    Each season covers three months; its periods are split into three
    blocks with the remainder given to the later months (13 -> 4, 4, 5).
    """
    n = horizon.periods_per_season
    base, rem = divmod(n, 3)
    sizes = [base + (1 if k >= 3 - rem else 0) for k in range(3)]
    within = np.repeat(np.arange(3), sizes)
    months = [(3 * t + within) % 12 for t in range(horizon.seasons)]
    return np.concatenate(months)


def weekly_demand_rates(
    annual_demand: Sequence[float],
    monthly_shares: Sequence[float],
    horizon: Horizon,
) -> np.ndarray:
    """Per-period Poisson rates, shape (n_periods, n_od).

    A period falling in month k gets ``annual * share_k / 4``.
    """
    shares = np.asarray(monthly_shares, dtype=float)
    annual = np.asarray(annual_demand, dtype=float)
    if shares.shape != (12,):
        raise ValueError("monthly_shares needs exactly 12 values")
    if abs(shares.sum() - 1.0) > 1e-9 or (shares < 0).any():
        raise ValueError(f"monthly shares must be non-negative and sum to 1 (got {shares.sum()!r})")
    if (annual < 0).any():
        raise ValueError("annual demand must be non-negative")
    months = period_months(horizon)
    return shares[months][:, None] * annual[None, :] / 4.0


def gen_demand_scenarios(
    rates: np.ndarray,
    n_scenarios: int,
    seed: int,
    workers: int = 1,
) -> list[np.ndarray]:
    """``n_scenarios`` integer demand arrays shaped like ``rates``."""
    if n_scenarios < 1:
        raise ValueError("n_scenarios must be >= 1")
    rates = np.asarray(rates, dtype=float)
    if (rates < 0).any():
        raise ValueError("Poisson rates must be non-negative")

    def draw(i):
        return scenario_rng(seed, DEMAND_STREAM, i).poisson(rates).astype(np.int64)

    return _fan_out(draw, n_scenarios, workers)


@dataclass(frozen=True)
class DisruptionRealization:
    disrupted: np.ndarray  # (n_periods, n_hubs) bool
    intensity: float

    def multipliers(self, network: Network) -> np.ndarray:
        """Arc travel-time factors, shape (n_periods, n_arcs).

        An arc touching any disrupted hub is slowed by ``intensity`` once,
        even when both endpoints are disrupted.
        """
        inc = network.hub_incidence().astype(np.int64)
        hit = (self.disrupted.astype(np.int64) @ inc.T) > 0
        return np.where(hit, self.intensity, 1.0)


def gen_disruption_scenarios(
    network: Network,
    rate: float,
    intensity: float,
    n_scenarios: int,
    n_periods: int,
    seed: int,
    workers: int = 1,
) -> list[DisruptionRealization]:
    if not 0.0 <= rate <= 1.0:
        raise ValueError(f"disruption rate must lie in [0, 1], got {rate}")
    if intensity < 1.0:
        raise ValueError(f"disruption intensity must be >= 1, got {intensity}")
    if n_scenarios < 1:
        raise ValueError("n_scenarios must be >= 1")
    n_hubs = len(network.hubs)

    def draw(i):
        u = scenario_rng(seed, DISRUPTION_STREAM, i).random((n_periods, n_hubs))
        return DisruptionRealization(u < rate, float(intensity))

    return _fan_out(draw, n_scenarios, workers)


def _fan_out(fn, n, workers):
    if workers <= 1:
        return [fn(i) for i in range(n)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(n)))


@dataclass(frozen=True)
class Scenario:
    """One season-long realization of demand and travel-time factors."""

    probability: float
    demand: np.ndarray  # (periods, n_od) int
    multipliers: np.ndarray  # (periods, n_arcs)
    disrupted: np.ndarray  # (periods, n_hubs) bool
    label: int = 0

    def __post_init__(self):
        if not self.probability > 0:
            raise ValueError("scenario probability must be positive")

    @property
    def n_periods(self) -> int:
        return self.demand.shape[0]

    def travel_times(self, network: Network) -> np.ndarray:
        return self.multipliers * network.base_hours[None, :]

    def with_probability(self, p: float) -> "Scenario":
        return Scenario(p, self.demand, self.multipliers, self.disrupted, self.label)


@dataclass(frozen=True)
class ScenarioSet:
    seasons: tuple[tuple[Scenario, ...], ...]
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "seasons", tuple(tuple(s) for s in self.seasons))
        for t, scen in enumerate(self.seasons):
            if not scen:
                raise ValueError(f"season {t} has no scenarios")
            total = sum(s.probability for s in scen)
            if abs(total - 1.0) > 1e-9:
                raise ValueError(f"season {t} probabilities sum to {total!r}, not 1")

    def __len__(self) -> int:
        return len(self.seasons)

    def __getitem__(self, t: int) -> tuple[Scenario, ...]:
        return self.seasons[t]

    def to_dict(self) -> dict:
        first = self.seasons[0][0]
        seasons = []
        for scen in self.seasons:
            entries = []
            for s in scen:
                slow = np.argwhere(s.multipliers != 1.0)
                entries.append(
                    {
                        "label": int(s.label),
                        "probability": float(s.probability),
                        "demand": s.demand.tolist(),
                        "disrupted": [np.flatnonzero(row).tolist() for row in s.disrupted],
                        "slowdowns": [[int(p), int(a), float(s.multipliers[p, a])] for p, a in slow],
                    }
                )
            seasons.append({"scenarios": entries})
        return {
            "schema": SCHEMA,
            "n_od": int(first.demand.shape[1]),
            "n_arcs": int(first.multipliers.shape[1]),
            "n_hubs": int(first.disrupted.shape[1]),
            "meta": self.meta,
            "seasons": seasons,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "ScenarioSet":
        if doc.get("schema") != SCHEMA:
            raise ValueError(f"unsupported scenario document schema {doc.get('schema')!r}")
        n_od, n_arcs, n_hubs = doc["n_od"], doc["n_arcs"], doc["n_hubs"]
        seasons = []
        for season in doc["seasons"]:
            scen = []
            for e in season["scenarios"]:
                demand = np.array(e["demand"], dtype=np.int64).reshape(-1, n_od)
                periods = demand.shape[0]
                mult = np.ones((periods, n_arcs))
                for p, a, f in e["slowdowns"]:
                    mult[p, a] = f
                disrupted = np.zeros((periods, n_hubs), dtype=bool)
                for p, hubs in enumerate(e["disrupted"]):
                    disrupted[p, hubs] = True
                scen.append(Scenario(e["probability"], demand, mult, disrupted, e.get("label", 0)))
            seasons.append(tuple(scen))
        return cls(tuple(seasons), dict(doc.get("meta", {})))

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def loads(cls, text: str) -> "ScenarioSet":
        return cls.from_dict(json.loads(text))


def assemble_scenarios(
    demands: Sequence[np.ndarray],
    disruptions: Sequence[DisruptionRealization],
    horizon: Horizon,
    network: Network,
) -> ScenarioSet:
    """Pair demand realization i with disruption realization i and split
    each pair into per-season scenarios of equal weight."""
    if len(demands) != len(disruptions):
        raise ValueError(f"got {len(demands)} demand and {len(disruptions)} disruption realizations")
    n = len(demands)
    if n == 0:
        raise ValueError("no realizations to assemble")
    p = 1.0 / n
    mults = [d.multipliers(network) for d in disruptions]
    seasons = []
    for t in range(horizon.seasons):
        rows = np.asarray(horizon.season_periods(t))
        seasons.append(
            tuple(
                Scenario(p, np.asarray(demands[i])[rows], mults[i][rows], disruptions[i].disrupted[rows], i)
                for i in range(n)
            )
        )
    return ScenarioSet(tuple(seasons))


def generate_scenario_set(
    network: Network,
    horizon: Horizon,
    monthly_shares: Sequence[float],
    n_scenarios: int,
    rate: float,
    intensity: float,
    seed: int,
    workers: int = 1,
) -> ScenarioSet:
    rates = weekly_demand_rates(network.annual_demand, monthly_shares, horizon)
    demands = gen_demand_scenarios(rates, n_scenarios, seed, workers)
    disruptions = gen_disruption_scenarios(
        network, rate, intensity, n_scenarios, horizon.n_periods, seed, workers
    )
    sset = assemble_scenarios(demands, disruptions, horizon, network)
    meta = {"seed": seed, "rate": rate, "intensity": intensity, "n_scenarios": n_scenarios}
    return ScenarioSet(sset.seasons, meta)
