"""Acceptance suite: one test per primary criterion, each asserting its own time budget."""
import subprocess
import sys
import time
from collections import Counter

import numpy as np

from mgsim import Microgrid
from mgsim import _kernels as K
from mgsim.bench import BenchmarkConfig, displayed_values, render_report, run_benchmark
from mgsim.cli import main
from mgsim.controllers import tabular_q_learning
from mgsim.generate import ScenarioSet
from mgsim.lp import LinearProgram, feasibility_check, solve

from oracles import random_integer_lp, value_iteration, vertex_enumeration
from test_bench import reference_report, table_cells

PYMGRID25_MIX = {"genset-only": 4, "grid+genset": 3, "grid-only": 9, "weak-grid": 9}


def test_scenario_structure(tmp_path):
    for seed in range(12):
        path = tmp_path / f"s{seed}.json"
        t0 = time.perf_counter()
        assert main(["generate", "--preset", "pymgrid25", "--seed", str(seed), "--scenario-out", str(path)]) == 0
        assert time.perf_counter() - t0 < 1.0
        ss = ScenarioSet.load(path)
        assert Counter(ss.architectures()) == PYMGRID25_MIX
    path = tmp_path / "p10.json"
    t0 = time.perf_counter()
    assert main(["generate", "--preset", "pymgrid10", "--seed", "0", "--scenario-out", str(path)]) == 0
    assert time.perf_counter() - t0 < 1.0
    ss = ScenarioSet.load(path)
    assert len(ss.microgrids) == 10
    for cfg in ss.microgrids:
        assert cfg.architecture == "genset-only"
        assert cfg.genset is not None and cfg.grid is None
        assert cfg.pv.values.max() > 0 and cfg.battery.capacity > 0


def test_physical_invariants(pymgrid25):
    t0 = time.perf_counter()
    rng = np.random.default_rng(0)
    worst_balance = 0.0
    episodes = 0
    for ep in range(100):
        mg = Microgrid(pymgrid25.microgrids[ep % 25])
        mg.reset(phase="full")
        P = mg.params
        scale = max(mg.load_peak, mg.pv_peak)
        raw = rng.random((mg.horizon, 8)) * scale * (rng.random((mg.horizon, 8)) < 0.5)
        acts = np.empty((mg.horizon, 8))
        socs = np.empty(mg.horizon)
        for t, a in enumerate(raw.tolist()):
            rec = mg.run(a)
            acts[t] = rec.action.as_tuple()
            socs[t] = mg.soc
        load, pv = mg.load[:mg.horizon], mg.pv[:mg.horizon]
        bal_load = acts[:, 0] + acts[:, 2] + acts[:, 3] + acts[:, 5] + acts[:, 6] - load
        bal_pv = acts[:, 0] + acts[:, 1] + acts[:, 4] + acts[:, 7] - pv
        worst_balance = max(worst_balance, np.abs(bal_load).max(), np.abs(bal_pv).max())
        assert np.all(socs >= P[K.SOC_LO] - 1e-9) and np.all(socs <= P[K.SOC_HI] + 1e-9)
        assert np.all(acts >= 0.0)
        episodes += 1
        mg.log.clear()
    assert episodes == 100 and mg.horizon == 8760
    assert worst_balance <= 1e-6
    assert time.perf_counter() - t0 < 60.0


def test_lp_oracle():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    optimal = 0
    while optimal < 1000:
        c, A, senses, b, lo, hi = random_integer_lp(rng)
        status, value, _ = vertex_enumeration(c, A, senses, b, lo, hi)
        lp = LinearProgram(c, A, senses, b, lo, hi)
        sol = solve(lp)
        assert sol.status == status
        if status == "optimal":
            assert abs(sol.objective_value - value) <= 1e-6
            assert feasibility_check(lp, sol.x, scaled=True) <= 1e-7
            optimal += 1
    assert optimal >= 1000
    assert time.perf_counter() - t0 < 30.0


def test_controller_ordering():
    # seed-specific: the mean ordering is asserted for scenario seed 0 only
    t0 = time.perf_counter()
    common = dict(preset="pymgrid25", seed=0, days=90)
    (full,) = run_benchmark(BenchmarkConfig(controllers=("mpc",), horizon=None, **common))
    others = run_benchmark(BenchmarkConfig(controllers=("mpc", "rbc", "q", "qdt"), horizon=24, **common))
    reports = {r.controller: r for r in [full] + others}
    assert full.controller == "mpc-full"
    for name, rep in reports.items():
        for i, (best, cost) in enumerate(zip(full.costs, rep.costs)):
            assert best <= cost + 1e-6 * abs(cost), (name, i, best, cost)
    means = {n: r.mean() for n, r in reports.items()}
    assert means["mpc-full"] <= means["qdt"] <= means["rbc"] <= means["q"], means
    assert time.perf_counter() - t0 < 15 * 60


def test_q_learning_matches_value_iteration():
    t0 = time.perf_counter()
    # two states; action 0 stays, action 1 switches
    transition = np.array([[0, 1], [1, 0]])
    reward = np.array([[0.0, 1.0], [2.0, 0.0]])
    gamma = 0.9

    def step(s, a):
        return int(transition[s, a]), float(reward[s, a]), False

    Q = tabular_q_learning(step, 2, 2, episodes=10_000, episode_length=20, alpha=0.1, gamma=gamma, eps=1.0, seed=0)
    Q_star = value_iteration(transition, reward, gamma)
    assert np.max(np.abs(Q - Q_star)) <= 1e-3
    assert time.perf_counter() - t0 < 30.0


def _check_footing(text, reports):
    cells = table_cells(text)
    groups = ("Genset only", "Grid only", "Grid + Genset", "Weak grid")
    num = lambda s: int(s.rstrip("*").replace(",", ""))
    for col, rep in enumerate(sorted(reports, key=lambda r: ("mpc-full", "mpc", "rbc", "q", "qdt").index(r.controller))):
        shown = displayed_values(rep)
        present = [g for g in groups if (g, "total") in cells]
        assert sum(num(cells[(g, "total")][col]) for g in present) == num(cells[("All", "total")][col])
        for g_key, label in zip(rep.groups(), ["All"] + present):
            n = rep.count(g_key)
            mean, total = num(cells[(label, "mean")][col]), num(cells[(label, "total")][col])
            assert mean == shown[(g_key, "mean")] == round(rep.total(g_key) / 1000.0 / n)
            # mean x count reproduces the total to within the displayed rounding
            assert abs(mean * n - total) <= 0.5 * n + 0.5


def test_report_cross_footing():
    ref = [reference_report()]
    text = render_report(ref, "table")
    _check_footing(text, ref)
    cells = table_cells(text)
    assert cells[("All", "total")] == ["291,086"] and cells[("All", "mean")] == ["11,643"]
    reports = run_benchmark(BenchmarkConfig(seed=0, controllers=("rbc", "mpc", "q", "qdt"), days=6, episodes=50,
                                            horizon=12))
    _check_footing(render_report(reports, "table"), reports)


def test_determinism(tmp_path):
    scen = tmp_path / "s.json"
    assert main(["generate", "--preset", "pymgrid25", "--seed", "3", "--scenario-out", str(scen)]) == 0
    args = ["bench", "--scenario-in", str(scen), "--controllers", "rbc,mpc,q,qdt", "--days", "5",
            "--episodes", "40", "--horizon", "12", "--seed", "3"]

    def run(name, extra=()):
        out = tmp_path / name
        res = subprocess.run([sys.executable, "-m", "mgsim"] + args + ["--out", str(out)] + list(extra),
                             capture_output=True, text=True)
        assert res.returncode == 0, res.stderr
        return out.read_bytes()

    a, b, c = run("a.csv"), run("b.csv"), run("c.csv", ["--jobs", "2"])
    assert a == b == c
    assert a.count(b"\n") == 1 + 5 * 2 * 4
