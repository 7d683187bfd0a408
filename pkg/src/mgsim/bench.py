"""Benchmark sweeps over scenario sets and Table-style cost reports."""
from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .controllers import (
    EvalReport,
    MPCController,
    QDTController,
    QLearningController,
    RuleBasedController,
    evaluate_controller,
    qlearn_train,
)
from .controllers.mpc import lp_dump_hook
from .core import Microgrid
from .errors import ConfigError, DomainError
from .generate import PRESET_SIZES, ScenarioSet, build_scenario_set
from .profiles import HOURS_PER_YEAR

KNOWN_CONTROLLERS = ("rbc", "mpc", "q", "qdt")
DISPLAY_NAMES = {
    "mpc": "MPC",
    "mpc-full": "MPC (full)",
    "rbc": "Rule-based",
    "q": "Q-learning",
    "qdt": "Q-learning + DT",
}
GROUP_NAMES = {
    "All": "All",
    "genset-only": "Genset only",
    "grid-only": "Grid only",
    "grid+genset": "Grid + Genset",
    "weak-grid": "Weak grid",
}
FORMATS = ("csv", "json", "table")


@dataclass
class BenchmarkConfig:
    preset: str = "pymgrid25"
    seed: int = 0
    controllers: Sequence[str] = KNOWN_CONTROLLERS
    horizon: Optional[int] = 24  # None plans to the end of the test phase
    train_frac: float = 0.67
    episodes: int = 2000
    alpha: float = 0.1
    gamma: float = 0.95
    eps_start: float = 1.0
    eps_end: float = 0.02
    n_net: int = 10
    n_soc: int = 10
    days: Optional[int] = None
    jobs: int = 1
    scenario_in: Optional[str] = None
    count: Optional[int] = None
    dump_lp: Optional[int] = None
    dump_dir: str = "."

    def __post_init__(self):
        self.controllers = tuple(self.controllers)

    def validate(self):
        if not self.controllers:
            raise ConfigError("select at least one controller")
        unknown = [c for c in self.controllers if c not in KNOWN_CONTROLLERS]
        if unknown:
            raise ConfigError(f"unknown controllers {unknown}; choose from {list(KNOWN_CONTROLLERS)}")
        if len(set(self.controllers)) != len(self.controllers):
            raise ConfigError("controller list has duplicates")
        if not 0 < self.train_frac < 1:
            raise ConfigError("train fraction must lie in (0, 1)")
        if self.horizon is not None and self.horizon < 1:
            raise ConfigError("MPC horizon must be at least 1")
        if self.days is not None and not 1 <= self.days * 24 <= HOURS_PER_YEAR:
            raise ConfigError("days must lie in [1, 365]")
        if self.episodes < 0 or self.jobs < 1:
            raise ConfigError("episodes must be nonnegative and jobs positive")
        if not 0 < self.alpha <= 1 or not 0 <= self.gamma < 1:
            raise ConfigError("alpha must lie in (0, 1] and gamma in [0, 1)")
        if self.scenario_in is None and self.preset not in PRESET_SIZES and self.preset != "random":
            raise ConfigError(f"unknown preset {self.preset!r}")
        return self

    @property
    def mpc_name(self):
        return "mpc" if self.horizon is not None else "mpc-full"

    def q_kwargs(self):
        return dict(episodes=self.episodes, alpha=self.alpha, gamma=self.gamma, eps_start=self.eps_start,
                    eps_end=self.eps_end, n_net=self.n_net, n_soc=self.n_soc)


def microgrid_seed(seed: int, index: int) -> int:
    """Training seed for microgrid ``index``, independent of worker scheduling."""
    return int(np.random.SeedSequence([seed, index]).generate_state(1)[0])


def _evaluate_one(job):
    cfg, index, mg_config = job
    horizon = None if cfg.days is None else cfg.days * 24
    mg = Microgrid(mg_config, horizon=horizon)
    mg.train_test_split(cfg.train_frac)
    out = {}
    table = None
    for name in cfg.controllers:
        if name == "rbc":
            ctrl = RuleBasedController()
        elif name == "mpc":
            hook = None
            if cfg.dump_lp is not None:
                start, _ = mg.phase_bounds("test")
                hook = lp_dump_hook(start + cfg.dump_lp, cfg.dump_dir, f"mg{index:03d}_{cfg.mpc_name}")
            ctrl = MPCController(cfg.horizon, on_lp=hook)
        else:
            if table is None:
                table = qlearn_train(mg, seed=microgrid_seed(cfg.seed, index), **cfg.q_kwargs())
            ctrl = QLearningController(table) if name == "q" else QDTController.train(mg, table=table)
        out[name] = evaluate_controller(ctrl, mg, "test")
    return out


def load_scenarios(cfg: BenchmarkConfig) -> ScenarioSet:
    if cfg.scenario_in is not None:
        return ScenarioSet.load(cfg.scenario_in)
    return build_scenario_set(cfg.preset, cfg.count, cfg.seed)


def run_benchmark(cfg: BenchmarkConfig, scenarios: Optional[ScenarioSet] = None) -> list:
    """Train and evaluate every selected controller on every microgrid.

    Returns one :class:`EvalReport` per controller, in the order requested.
    Costs are test-phase totals in $.
    """
    cfg.validate()
    if scenarios is None:
        scenarios = load_scenarios(cfg)
    if cfg.dump_lp is not None:
        os.makedirs(cfg.dump_dir, exist_ok=True)
    jobs = [(cfg, i, m) for i, m in enumerate(scenarios.microgrids)]
    if cfg.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=min(cfg.jobs, len(jobs))) as pool:
            results = list(pool.map(_evaluate_one, jobs))
    else:
        results = [_evaluate_one(j) for j in jobs]
    archs = scenarios.architectures()
    names = [cfg.mpc_name if c == "mpc" else c for c in cfg.controllers]
    return [EvalReport(n, scenarios.seed, [r[c] for r in results], archs)
            for n, c in zip(names, cfg.controllers)]


# -- rendering ---------------------------------------------------------------

COLUMN_ORDER = ("mpc-full", "mpc", "rbc", "q", "qdt")


def _column_key(report):
    c = report.controller
    return (COLUMN_ORDER.index(c) if c in COLUMN_ORDER else len(COLUMN_ORDER), c)


def _check_reports(reports):
    if not reports:
        raise DomainError("no reports to render")
    first = reports[0]
    for r in reports[1:]:
        if r.architectures != first.architectures:
            raise DomainError("reports cover different scenario sets")
    return first


def report_rows(reports) -> list:
    """Long-format rows ``(controller, group, count, metric, k$)`` for nonempty groups."""
    first = _check_reports(reports)
    reports = sorted(reports, key=_column_key)
    rows = []
    for r in reports:
        for g in first.groups():
            n = r.count(g)
            rows.append((r.controller, g, n, "mean", r.total(g) / n / 1000.0))
            rows.append((r.controller, g, n, "total", r.total(g) / 1000.0))
    return rows


def footed_integers(values, total) -> list:
    """Round ``values`` to integers whose sum equals ``round(total)``.

    Largest-remainder rounding: floor everything, then hand the missing units
    to the largest fractional parts (earlier entries win ties).
    """
    target = int(round(total))
    floors = [math.floor(v) for v in values]
    short = target - sum(floors)
    if not 0 <= short <= len(values):
        return [int(round(v)) for v in values]
    order = sorted(range(len(values)), key=lambda i: (-(values[i] - floors[i]), i))
    for i in order[:short]:
        floors[i] += 1
    return floors


def displayed_values(report: EvalReport) -> dict:
    """Integer k$ per (group, metric) as shown in the table, footed so groups sum to All."""
    groups = report.groups()
    parts = [g for g in groups if g != "All"]
    totals = {"All": int(round(report.total("All") / 1000.0))}
    if parts:
        for g, v in zip(parts, footed_integers([report.total(g) / 1000.0 for g in parts],
                                               report.total("All") / 1000.0)):
            totals[g] = v
    out = {}
    for g in groups:
        out[(g, "total")] = totals[g]
        out[(g, "mean")] = int(round(report.total(g) / 1000.0 / report.count(g)))
    return out


def _fmt(v: int) -> str:
    return f"{v:,}"


def render_csv(reports) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["controller", "group", "count", "metric", "cost_kusd"])
    for c, g, n, m, v in report_rows(reports):
        w.writerow([c, g, n, m, repr(v)])
    return buf.getvalue()


def render_json(reports) -> str:
    first = _check_reports(reports)
    reports = sorted(reports, key=_column_key)
    groups = []
    for g in first.groups():
        entry = {"group": g, "count": first.count(g), "controllers": {}}
        for r in reports:
            n = r.count(g)
            t = r.total(g)
            entry["controllers"][r.controller] = {
                "total_usd": t, "mean_usd": t / n,
                "total_kusd": t / 1000.0, "mean_kusd": t / n / 1000.0,
            }
        groups.append(entry)
    doc = {
        "seed": first.seed,
        "phase": "test",
        "unit": "k$",
        "controllers": [r.controller for r in reports],
        "groups": groups,
        "microgrids": [
            {"index": i, "architecture": a, "cost_usd": {r.controller: r.costs[i] for r in reports}}
            for i, a in enumerate(first.architectures)
        ],
    }
    return json.dumps(doc, indent=2) + "\n"


def render_table(reports) -> str:
    """Plain-text table: a Mean/Total row pair per group, one column per controller.

    The lowest non-MPC value in each row carries a ``*`` when at least two
    non-MPC controllers are shown.
    """
    first = _check_reports(reports)
    reports = sorted(reports, key=_column_key)
    shown = {r.controller: displayed_values(r) for r in reports}
    learners = [r for r in reports if not r.controller.startswith("mpc")]
    header = ["Architecture", "Metric (k$)"] + [DISPLAY_NAMES.get(r.controller, r.controller) for r in reports]
    body = []
    for g in first.groups():
        for metric, label in (("mean", "Mean cost"), ("total", "Total cost")):
            best = None
            if len(learners) >= 2:
                raw = [r.total(g) for r in learners]
                best = min(raw)
            cells = []
            for r in reports:
                cell = _fmt(shown[r.controller][(g, metric)])
                if best is not None and r in learners and r.total(g) == best:
                    cell += "*"
                cells.append(cell)
            body.append([GROUP_NAMES[g] if metric == "mean" else "", label] + cells)
    widths = [max(len(row[i]) for row in [header] + body) for i in range(len(header))]

    def line(row):
        left = [row[0].ljust(widths[0]), row[1].ljust(widths[1])]
        return "  ".join(left + [c.rjust(w) for c, w in zip(row[2:], widths[2:])]).rstrip()

    rule = "-" * len(line(header))
    out = [line(header), rule]
    for i, row in enumerate(body):
        if i and i % 2 == 0:
            out.append(rule)
        out.append(line(row))
    out.append(rule)
    out.append(f"test-phase costs, scenario seed {first.seed}, {len(first.costs)} microgrids")
    return "\n".join(out) + "\n"


def render_report(reports, fmt: str = "csv") -> str:
    if fmt == "csv":
        return render_csv(reports)
    if fmt == "json":
        return render_json(reports)
    if fmt in ("table", "text-table"):
        return render_table(reports)
    raise DomainError(f"unknown report format {fmt!r}")

