"""Compare the compiled and pure-Python kernel backends.

    python3 benchmarks/bench_kernels.py [--repeat 3]

Each case runs on both backends with identical inputs, checks that the
outputs agree bitwise, and prints the best wall time and the speedup.
"""
import argparse
import time

import numpy as np

from mgsim import Microgrid, build_scenario_set
from mgsim._kernels import backends


def _best(fn, repeat):
    times = []
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def case_rollout(K, mg):
    """Rule-based year: expand + apply at every step."""
    P, soc, total = mg.params, mg.config.battery.soc_init * mg.config.battery.capacity, 0.0
    load, pv, up = mg._load_l, mg._pv_l, mg._up_l
    pimp, pexp = mg._pimp_l, mg._pexp_l
    for t in range(mg.horizon):
        a = K.expand(P, 0, load[t], pv[t], soc, up[t], pimp[t], pexp[t])
        res = K.apply(P, a, load[t], pv[t], soc, up[t], pimp[t], pexp[t])
        soc = res[2]
        total += res[3] + res[4] - res[5] + res[6] + res[7]
    return total


def case_q_episode(K, mg, n_episodes=3):
    rng = np.random.default_rng(0)
    Q = np.zeros((2400, 8))
    N = np.zeros((2400, 8), dtype=np.int64)
    soc0 = mg.config.battery.soc_init * mg.config.battery.capacity
    n = mg.horizon
    for _ in range(n_episodes):
        u = rng.random(n)
        ra = rng.integers(0, 8, n, dtype=np.int64)
        K.q_episode(Q, N, mg.params, mg.load, mg.pv, mg.grid_up, mg.import_price, mg.export_price,
                    0, n, soc0, 0.3, u, ra, 0.1, 0.95, -mg.pv_peak, mg.load_peak, 10, 10, mg.load_peak)
    return Q


def case_pivot(K, m=300, n=1200, pivots=40):
    rng = np.random.default_rng(1)
    T = rng.normal(size=(m, n + 1)) * (rng.random((m, n + 1)) < 0.1)
    T[np.arange(m), np.arange(m)] = 1.0
    d = rng.normal(size=n + 1)
    for k in range(pivots):
        K.pivot(T, d, k, k)
    return T


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    mods = backends()
    if "cython" not in mods:
        print("compiled backend not built; only the Python backend is available")
    mg = Microgrid(build_scenario_set("pymgrid25", seed=0).microgrids[1])
    cases = {
        "rbc rollout (8760 steps)": lambda K: case_rollout(K, mg),
        "q_episode x3 (8760 steps)": lambda K: case_q_episode(K, mg),
        "pivot x40 (300x1201)": case_pivot,
    }
    print(f"{'case':28s} {'python s':>10s} {'cython s':>10s} {'speedup':>8s}  match")
    for name, fn in cases.items():
        tp, op = _best(lambda: fn(mods["python"]), args.repeat)
        if "cython" in mods:
            tc, oc = _best(lambda: fn(mods["cython"]), args.repeat)
            same = np.array_equal(np.asarray(op), np.asarray(oc))
            print(f"{name:28s} {tp:10.4f} {tc:10.4f} {tp / tc:8.1f}  {same}")
        else:
            print(f"{name:28s} {tp:10.4f} {'-':>10s} {'-':>8s}  -")


if __name__ == "__main__":
    main()
