"""Run configuration and the generate -> reduce -> solve -> report pipeline."""

from __future__ import annotations

import copy
import csv
import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable

import numpy as np

from .metrics import EnvFactors, PlanReport, compare_runs, compute_metrics
from .model import (
    CapacityPlan,
    MilpInstance,
    Mode,
    PlanningData,
    audit_solution,
    build_deterministic_equivalent,
    expected_costs,
    extract_solution,
)
from .mps import export_mps
from .network import CostTable, Horizon, Network, Node, NodeKind, build_relay_network
from .reduction import reduce_scenario_set, reduction_report_csv
from .scenarios import ScenarioSet, generate_scenario_set
from .solver import solve_milp
from .solver.bnb import relative_gap

log = logging.getLogger(__name__)


class ConfigError(ValueError):
    """Invalid or incomplete run configuration."""


DEFAULTS: dict[str, Any] = {
    "network": None,
    "demand": None,
    "monthly_shares": None,
    "costs": None,
    "scenario_cache": None,
    "horizon": {"seasons": 4, "periods_per_season": 13, "days_per_period": 7},
    "max_leg_hours": 5.5,
    "speed_mph": 50.0,
    "allow_direct": False,
    "uncertainty": {"rate": 0.05, "intensity": 1.5},
    "n_scenarios": 50,
    "reduce_to": 10,
    "mode": "dynamic",
    "solver": {"backend": "bnb", "gap": 1e-6, "time_limit": None, "node_limit": None, "prune": True},
    "env_factors": {"vehicles_per_truck": 8.0, "mpg": 6.0, "diesel_kg_per_gal": 3.22, "co2_kg_per_gal": 10.21},
    "seed": None,
    "workers": 1,
}


def _merge(base: dict, extra: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in extra.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    return out


def set_dotted(doc: dict, dotted: str, value: Any) -> None:
    keys = dotted.split(".")
    node = doc
    for k in keys[:-1]:
        if not isinstance(node.get(k), dict):
            node[k] = {}
        node = node[k]
    node[keys[-1]] = value


def parse_scalar(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


@dataclass
class RunConfig:
    doc: dict
    base_dir: Path

    @classmethod
    def load(cls, path: str | Path | None = None, overrides: dict[str, Any] | None = None) -> "RunConfig":
        doc = copy.deepcopy(DEFAULTS)
        base = Path.cwd()
        if path is not None:
            p = Path(path)
            try:
                user = json.loads(p.read_text())
            except FileNotFoundError:
                raise ConfigError(f"config file not found: {p}") from None
            except json.JSONDecodeError as exc:
                raise ConfigError(f"{p}:{exc.lineno}: invalid JSON ({exc.msg})") from None
            if not isinstance(user, dict):
                raise ConfigError(f"{p}: top level must be an object")
            doc = _merge(doc, user)
            base = p.parent
        for key, val in (overrides or {}).items():
            set_dotted(doc, key, val)
        cfg = cls(doc, base)
        cfg.check()
        return cfg

    def __getitem__(self, key):
        node = self.doc
        for k in key.split("."):
            node = node[k]
        return node

    def check(self):
        unknown = set(self.doc) - set(DEFAULTS)
        if unknown:
            raise ConfigError(f"unknown config fields: {', '.join(sorted(unknown))}")
        for section, default in DEFAULTS.items():
            if isinstance(default, dict):
                value = self.doc[section]
                if not isinstance(value, dict):
                    raise ConfigError(f"{section} must be an object")
                extra = set(value) - set(default)
                if extra:
                    raise ConfigError(f"unknown config fields: {', '.join(f'{section}.{k}' for k in sorted(extra))}")
        try:
            Mode(self.doc["mode"])
        except ValueError:
            raise ConfigError(f"mode must be 'dynamic' or 'static', got {self.doc['mode']!r}") from None
        if self.doc["solver"]["backend"] not in ("bnb", "highs"):
            raise ConfigError("solver.backend must be 'bnb' or 'highs'")
        for key in ("n_scenarios", "reduce_to", "workers"):
            v = self.doc[key]
            if v is not None and (not isinstance(v, int) or v < 1):
                raise ConfigError(f"{key} must be a positive integer")

    def path(self, value) -> Path:
        p = Path(value)
        return p if p.is_absolute() else self.base_dir / p

    @property
    def seed(self) -> int:
        if self.doc["seed"] is None:
            raise ConfigError("a seed is required for scenario generation (set seed or --seed)")
        return int(self.doc["seed"])

    @property
    def horizon(self) -> Horizon:
        return Horizon(**self.doc["horizon"])

    @property
    def mode(self) -> Mode:
        return Mode(self.doc["mode"])

    @property
    def env(self) -> EnvFactors:
        return EnvFactors(**self.doc["env_factors"])

    def _load_doc(self, value, what):
        if value is None:
            raise ConfigError(f"config does not provide '{what}'")
        if isinstance(value, dict):
            return value
        p = self.path(value)
        try:
            return json.loads(p.read_text())
        except FileNotFoundError:
            raise ConfigError(f"{what} file not found: {p}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{p}:{exc.lineno}: invalid JSON ({exc.msg})") from None

    def network(self) -> Network:
        doc = self._load_doc(self.doc["network"], "network")
        net = load_network_document(
            doc,
            max_leg_hours=self.doc["max_leg_hours"],
            speed_mph=self.doc["speed_mph"],
            allow_direct=self.doc["allow_direct"],
        )
        if self.doc["demand"] is not None:
            net = apply_demand_csv(net, self.path(self.doc["demand"]))
        return net

    def costs(self) -> CostTable:
        doc = self._load_doc(self.doc["costs"], "costs")
        try:
            return CostTable.from_dict(doc)
        except ValueError as exc:
            raise ConfigError(f"costs: {exc}") from None

    def monthly_shares(self) -> np.ndarray:
        v = self.doc["monthly_shares"]
        if v is None:
            return np.full(12, 1.0 / 12.0)
        if isinstance(v, list):
            return np.asarray(v, dtype=float)
        return read_shares_csv(self.path(v))


def load_network_document(doc: dict, max_leg_hours=5.5, speed_mph=50.0, allow_direct=False) -> Network:
    """Network from a JSON document: explicit ``arcs`` are taken as given,
    otherwise arcs are built from coordinates or a ``distances`` matrix."""
    if "arcs" in doc:
        return Network.from_dict(doc)
    try:
        nodes = [
            Node(int(n["id"]), NodeKind(n["kind"]), n.get("lat"), n.get("lon"), n.get("name", ""))
            for n in doc["nodes"]
        ]
        ods = [(int(p["o"]), int(p["d"])) for p in doc["od_pairs"]]
        demand = [float(p.get("annual_demand", 0.0)) for p in doc["od_pairs"]]
    except (KeyError, ValueError, TypeError) as exc:
        raise ConfigError(f"network document: {exc}") from None
    dist = np.asarray(doc["distances"], dtype=float) if doc.get("distances") is not None else None
    return build_relay_network(
        nodes, ods, demand, distances=dist, max_leg_hours=max_leg_hours, speed_mph=speed_mph, allow_direct=allow_direct
    )


def apply_demand_csv(net: Network, path: Path) -> Network:
    """Replace OD pairs and annual demand with rows of an
    ``origin_id,dest_id,annual_demand`` CSV."""
    ods, demand = [], []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        need = {"origin_id", "dest_id", "annual_demand"}
        if reader.fieldnames is None or not need <= set(reader.fieldnames):
            raise ConfigError(f"{path}:1: demand CSV needs columns origin_id,dest_id,annual_demand")
        for lineno, row in enumerate(reader, start=2):
            try:
                ods.append((int(row["origin_id"]), int(row["dest_id"])))
                demand.append(float(row["annual_demand"]))
            except (TypeError, ValueError):
                raise ConfigError(f"{path}:{lineno}: bad demand row") from None
    out = Network(net.nodes, net.arcs, tuple(ods), tuple(demand), net.allow_direct)
    from .network import validate_network

    problems = validate_network(out)
    if problems:
        raise ConfigError(f"{path}: {problems[0]}")
    return out


def read_shares_csv(path: Path) -> np.ndarray:
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(x.strip() for x in r)]
    values = []
    for lineno, r in enumerate(rows, start=1):
        try:
            values.extend(float(x) for x in r)
        except ValueError:
            if lineno == 1:
                continue  # header
            raise ConfigError(f"{path}:{lineno}: non-numeric monthly share") from None
    if len(values) != 12:
        raise ConfigError(f"{path}: expected 12 monthly shares, found {len(values)}")
    return np.asarray(values)


def dump_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


# --- pipeline steps -------------------------------------------------------


def generate(cfg: RunConfig, network: Network | None = None) -> ScenarioSet:
    network = network or cfg.network()
    unc = cfg["uncertainty"]
    return generate_scenario_set(
        network,
        cfg.horizon,
        cfg.monthly_shares(),
        cfg["n_scenarios"],
        float(unc["rate"]),
        float(unc["intensity"]),
        cfg.seed,
        cfg["workers"],
    )


def reduce(cfg: RunConfig, raw: ScenarioSet, network: Network):
    k = cfg["reduce_to"]
    if k is None or k >= len(raw[0]):
        return raw, None
    return reduce_scenario_set(raw, network, k, workers=cfg["workers"])


def scenarios_for(cfg: RunConfig, network: Network) -> ScenarioSet:
    cache = cfg["scenario_cache"]
    if cache is not None:
        p = cfg.path(cache)
        try:
            return ScenarioSet.loads(p.read_text())
        except FileNotFoundError:
            raise ConfigError(f"scenario cache not found: {p}") from None
        except (ValueError, KeyError) as exc:
            raise ConfigError(f"{p}: {exc}") from None
    raw = generate(cfg, network)
    reduced, _ = reduce(cfg, raw, network)
    return reduced


@dataclass
class SolveResult:
    instance: MilpInstance
    plan: CapacityPlan
    report: PlanReport
    bnb: Any
    audit: list[str]
    objective_check: float
    x: np.ndarray | None = None

    def solution_doc(self) -> dict:
        data = self.instance.data
        return {
            "mode": data.mode.value,
            "objective": self.bnb.incumbent,
            "bound": self.bnb.bound,
            "gap": self.bnb.gap,
            "status": self.bnb.status,
            "plan": self.plan.to_dict(data.costs),
            "hubs": list(data.network.hubs),
            "instance": {"rows": self.instance.n_rows, "cols": self.instance.n_cols, "nnz": self.instance.nnz},
        }


def solve(
    cfg: RunConfig,
    network: Network,
    scenarios: ScenarioSet,
    costs: CostTable,
    mode: Mode | None = None,
    echo: Callable[[str], None] | None = None,
    fallback: np.ndarray | None = None,
) -> SolveResult:
    """Build and solve one deterministic equivalent.

    ``fallback`` is a column vector known to be feasible for this instance
    (a static solution is feasible for the dynamic model). It replaces the
    solver's incumbent when it is cheaper, which can happen when the solver
    stops at a positive gap.
    """
    mode = mode or cfg.mode
    horizon = cfg.horizon
    sv = cfg["solver"]
    inst = build_deterministic_equivalent(network, scenarios, costs, horizon, mode, prune=bool(sv["prune"]))
    if echo:
        echo(f"BUILD {inst.summary()}")
    bnb, x = solve_milp(
        inst,
        rel_gap=float(sv["gap"]),
        node_limit=sv["node_limit"],
        time_limit=sv["time_limit"],
        backend=sv["backend"],
        echo=echo,
    )
    if fallback is not None and fallback.shape == (inst.n_cols,):
        fb_obj = float(inst.c @ fallback)
        if x is None or fb_obj < bnb.incumbent:
            if echo:
                echo(f"FALLBACK incumbent {bnb.incumbent!r} replaced by supplied solution {fb_obj!r}")
            x = fallback
            bnb.incumbent = fb_obj
            bnb.gap = relative_gap(fb_obj, bnb.bound)
    if x is None:
        raise RuntimeError(f"solver finished without a solution ({bnb.status})")
    plan, second = extract_solution(inst, x)
    data = inst.data
    audit = audit_solution(data, plan, second)
    check = expected_costs(data, plan, second)["total"]
    rep = compute_metrics(plan, second, scenarios, network, costs, horizon, cfg.env)
    return SolveResult(inst, plan, rep, bnb, audit, check, x)


def write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def rel_diff(a: float, b: float) -> float:
    return abs(a - b) / max(1.0, abs(a), abs(b)) if math.isfinite(a) and math.isfinite(b) else math.inf


__all__ = [
    "ConfigError",
    "RunConfig",
    "SolveResult",
    "apply_demand_csv",
    "compare_runs",
    "dump_json",
    "export_mps",
    "generate",
    "load_network_document",
    "read_shares_csv",
    "reduce",
    "reduction_report_csv",
    "scenarios_for",
    "solve",
    "write_text",
]
