"""Command-line driver: ``relayhub <generate|reduce|solve|compare|export-mps|demo>``."""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from .metrics import PlanReport, compare_runs
from .model import ModelError, SolutionIntegrityError, build_deterministic_equivalent
from .mps import export_mps
from .network import NetworkError
from .pipeline import (
    ConfigError,
    RunConfig,
    dump_json,
    generate,
    parse_scalar,
    reduce,
    scenarios_for,
    solve,
    write_text,
)
from .reduction import reduction_report_csv
from .scenarios import ScenarioSet
from .solver import SolverError
from .synthetic import DEMO_SHARES, demo_costs, demo_network

# flag -> dotted config key
FLAG_KEYS = {
    "seed": "seed",
    "mode": "mode",
    "rate": "uncertainty.rate",
    "intensity": "uncertainty.intensity",
    "scenarios": "n_scenarios",
    "reduce_to": "reduce_to",
    "gap": "solver.gap",
    "time_limit": "solver.time_limit",
    "backend": "solver.backend",
    "workers": "workers",
}


class Log:
    """Collects log lines for log.txt and optionally echoes them."""

    def __init__(self, quiet: bool = False):
        self.lines: list[str] = []
        self.quiet = quiet

    def __call__(self, line: str) -> None:
        self.lines.append(line)
        if not self.quiet:
            print(line, file=sys.stderr)

    def text(self) -> str:
        return "\n".join(self.lines) + "\n"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        print(f"error: usage-error: {message}", file=sys.stderr)
        sys.exit(2)


def _parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--seed", type=int)
    common.add_argument("--mode", choices=["dynamic", "static"])
    common.add_argument("--rate", type=float, help="per-hub per-period disruption probability")
    common.add_argument("--intensity", type=float, help="travel-time multiplier on disrupted arcs")
    common.add_argument("--scenarios", type=int, help="scenarios generated per season")
    common.add_argument("--reduce-to", type=int, help="scenarios kept per season after reduction")
    common.add_argument("--out", default="out", help="output directory")
    common.add_argument("--gap", type=float, help="relative optimality gap")
    common.add_argument("--time-limit", type=float, help="solver time limit in seconds")
    common.add_argument("--backend", choices=["bnb", "highs"])
    common.add_argument("--workers", type=int)
    common.add_argument("--quiet", action="store_true")

    p = _Parser(prog="relayhub", description="Relay hub capacity planning under uncertainty.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("generate", parents=[common], help="sample demand and disruption scenarios")
    sub.add_parser("reduce", parents=[common], help="fast forward selection of scenarios")
    sub.add_parser("solve", parents=[common], help="build and solve the deterministic equivalent")
    cmp_ = sub.add_parser("compare", parents=[common], help="compare report files or configs")
    cmp_.add_argument("inputs", nargs="*", help="report.json files or run configs")
    cmp_.add_argument("--modes", action="store_true", help="solve the config in both modes and compare")
    sub.add_parser("export-mps", parents=[common], help="write the deterministic equivalent as MPS")
    demo = sub.add_parser("demo", parents=[common], help="write the bundled 22-hub instance")
    demo.add_argument("--n-od", type=int, default=4)
    demo.add_argument("--run", action="store_true", help="also run the static/dynamic comparison")
    return p


def _dotted_overrides(extra: list[str]) -> dict:
    """``--a.b value`` or ``--a.b=value`` pairs left over by argparse."""
    out = {}
    i = 0
    while i < len(extra):
        tok = extra[i]
        if not tok.startswith("--"):
            raise ConfigError(f"unexpected argument {tok!r}")
        key = tok[2:]
        if "=" in key:
            key, val = key.split("=", 1)
        else:
            if i + 1 >= len(extra):
                raise ConfigError(f"missing value for --{key}")
            i += 1
            val = extra[i]
        out[key.replace("-", "_") if "." not in key else key] = parse_scalar(val)
        i += 1
    return out


def load_config(args, extra) -> RunConfig:
    overrides = _dotted_overrides(extra)
    for flag, key in FLAG_KEYS.items():
        v = getattr(args, flag, None)
        if v is not None:
            overrides[key] = v
    return RunConfig.load(args.config, overrides)


def cmd_generate(cfg: RunConfig, out: Path, log: Log) -> None:
    net = cfg.network()
    raw = generate(cfg, net)
    write_text(out / "scenarios" / "raw.json", raw.dumps())
    log(f"GENERATE seasons={len(raw)} per_season={len(raw[0])} seed={cfg.seed}")


def cmd_reduce(cfg: RunConfig, out: Path, log: Log) -> None:
    net = cfg.network()
    if cfg["scenario_cache"] is not None:
        raw = ScenarioSet.loads(cfg.path(cfg["scenario_cache"]).read_text())
    else:
        raw = generate(cfg, net)
        write_text(out / "scenarios" / "raw.json", raw.dumps())
    reduced, reports = reduce(cfg, raw, net)
    write_text(out / "scenarios" / "reduced.json", reduced.dumps())
    if reports is not None:
        write_text(out / "reduction.csv", reduction_report_csv(reports, raw))
        for t, r in enumerate(reports):
            log(f"REDUCE season={t} kept={len(r.selected)} distance={r.distance!r}")
    else:
        log("REDUCE identity")


def _solve_one(cfg, out: Path, log: Log, mode=None, fallback=None):
    net = cfg.network()
    costs = cfg.costs()
    scen = scenarios_for(cfg, net)
    res = solve(cfg, net, scen, costs, mode=mode, echo=log, fallback=fallback)
    log(f"SOLVE status={res.bnb.status} objective={res.bnb.incumbent!r} gap={res.bnb.gap:.3e} "
        f"nodes={res.bnb.nodes} time={res.bnb.wall_time:.2f}s")
    if res.audit:
        raise SolutionIntegrityError("audit failed: " + "; ".join(res.audit[:3]))
    out.mkdir(parents=True, exist_ok=True)
    write_text(out / "solution.json", dump_json(res.solution_doc()))
    write_text(out / "report.json", dump_json(res.report.to_dict()))
    write_text(out / "report.csv", res.report.to_csv())
    return res


def cmd_solve(cfg: RunConfig, out: Path, log: Log) -> None:
    _solve_one(cfg, out, log)


def cmd_compare(cfg: RunConfig, out: Path, log: Log, inputs: list[str], modes: bool) -> None:
    runs = []
    if modes:
        # static first: its solution is feasible for the dynamic model
        static = _solve_one(RunConfig(dict(cfg.doc, mode="static"), cfg.base_dir), out / "static", log)
        dynamic = _solve_one(
            RunConfig(dict(cfg.doc, mode="dynamic"), cfg.base_dir), out / "dynamic", log, fallback=static.x
        )
        runs += [("dynamic", dynamic.report), ("static", static.report)]
    for item in inputs:
        p = Path(item)
        try:
            doc = json.loads(p.read_text())
        except FileNotFoundError:
            raise ConfigError(f"file not found: {p}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{p}:{exc.lineno}: invalid JSON ({exc.msg})") from None
        if "total_costs" in doc:
            label = p.parent.name or p.stem
            runs.append((label, PlanReport.from_dict(doc)))
        else:
            sub_cfg = RunConfig.load(p)
            res = _solve_one(sub_cfg, out / p.stem, log)
            runs.append((p.stem, res.report))
    cmp = compare_runs(runs)
    write_text(out / "comparison.csv", cmp.to_csv())
    write_text(out / "comparison.json", cmp.to_json() + "\n")
    log(f"COMPARE runs={','.join(cmp.labels)}")


def cmd_export_mps(cfg: RunConfig, out: Path, log: Log) -> None:
    net = cfg.network()
    costs = cfg.costs()
    scen = scenarios_for(cfg, net)
    inst = build_deterministic_equivalent(net, scen, costs, cfg.horizon, cfg.mode, prune=bool(cfg["solver.prune"]))
    log(f"BUILD {inst.summary()}")
    write_text(out / "model.mps", export_mps(inst))


def cmd_demo(args, extra, out: Path, log: Log) -> None:
    net = demo_network(seed=args.seed if args.seed is not None else 7, n_od=args.n_od)
    costs = demo_costs(net)
    write_text(out / "network.json", dump_json(net.to_dict()))
    write_text(out / "costs.json", dump_json(costs.to_dict()))
    config = {
        "network": "network.json",
        "costs": "costs.json",
        "monthly_shares": [float(s) for s in DEMO_SHARES],
        "seed": 1,
        "n_scenarios": 50,
        "reduce_to": 10,
        "uncertainty": {"rate": 0.05, "intensity": 1.5},
        "solver": {"backend": "highs", "gap": 0.01, "time_limit": 1500, "prune": True},
    }
    write_text(out / "config.json", dump_json(config))
    log(f"DEMO hubs={len(net.hubs)} arcs={len(net.arcs)} od_pairs={len(net.od_pairs)} -> {out / 'config.json'}")
    if args.run:
        cfg = load_config(argparse.Namespace(**dict(vars(args), config=str(out / "config.json"), seed=None)), extra)
        cmd_compare(cfg, out, log, [], modes=True)


ERROR_CATEGORIES = [
    (ConfigError, "config-error"),
    (NetworkError, "network-error"),
    (SolutionIntegrityError, "audit-error"),
    (ModelError, "model-error"),
    (SolverError, "solver-error"),
    (OSError, "io-error"),
    (ValueError, "input-error"),
    (RuntimeError, "solver-error"),
]


def main(argv: list[str] | None = None) -> int:
    parser = _parser()
    args, extra = parser.parse_known_args(argv)
    out = Path(args.out)
    log = Log(args.quiet)
    t0 = time.perf_counter()
    try:
        if args.command == "demo":
            cmd_demo(args, extra, out, log)
        else:
            cfg = load_config(args, extra)
            if args.command == "generate":
                cmd_generate(cfg, out, log)
            elif args.command == "reduce":
                cmd_reduce(cfg, out, log)
            elif args.command == "solve":
                cmd_solve(cfg, out, log)
            elif args.command == "compare":
                cmd_compare(cfg, out, log, args.inputs, args.modes)
            elif args.command == "export-mps":
                cmd_export_mps(cfg, out, log)
    except Exception as exc:  # noqa: BLE001 - mapped to a one-line category
        for kind, category in ERROR_CATEGORIES:
            if isinstance(exc, kind):
                msg = str(exc).replace("\n", " ")
                print(f"error: {category}: {msg}", file=sys.stderr)
                return 2
        raise
    log(f"DONE {args.command} in {time.perf_counter() - t0:.2f}s")
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "log.txt", "a") as fh:
        fh.write(log.text())
    return 0


if __name__ == "__main__":
    sys.exit(main())
