"""Tabular Q-learning over discretized (hour, net load, SOC) states and the action templates."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .. import _kernels as K
from ..core import ControlAction, Microgrid, Observation
from ..errors import DomainError, SplitError
from .base import Controller, expand_template

N_ACTIONS = K.N_TEMPLATES


@dataclass(frozen=True)
class Discretizer:
    net_lo: float
    net_hi: float
    n_net: int = 10
    n_soc: int = 10

    @classmethod
    def for_microgrid(cls, mg: Microgrid, n_net: int = 10, n_soc: int = 10):
        return cls(-mg.pv_peak, mg.load_peak, n_net, n_soc)

    @property
    def n_states(self):
        return 24 * self.n_net * self.n_soc

    def bins(self, obs: Observation):
        nb = math.floor((obs.load_now - obs.pv_now - self.net_lo) / (self.net_hi - self.net_lo) * self.n_net)
        nb = min(max(nb, 0), self.n_net - 1)
        sb = math.floor(obs.soc_fraction * self.n_soc)
        sb = min(max(sb, 0), self.n_soc - 1)
        return obs.hour_of_day, nb, sb


def discretize(obs: Observation, disc: Discretizer) -> int:
    hour, nb, sb = disc.bins(obs)
    return (hour * disc.n_net + nb) * disc.n_soc + sb


@dataclass
class QTable:
    disc: Discretizer
    values: np.ndarray
    visits: np.ndarray
    returns: list = field(default_factory=list)

    @classmethod
    def zeros(cls, disc: Discretizer, n_actions: int = N_ACTIONS):
        return cls(disc, np.zeros((disc.n_states, n_actions)), np.zeros((disc.n_states, n_actions), dtype=np.int64))

    @property
    def shape(self):
        return (24, self.disc.n_net, self.disc.n_soc, self.values.shape[1])

    def greedy(self, state: int) -> int:
        return int(np.argmax(self.values[state]))

    def greedy_visited(self, state: int) -> int:
        """Best action among those tried at least once (greedy if none were)."""
        seen = self.visits[state] > 0
        if not seen.any():
            return self.greedy(state)
        q = np.where(seen, self.values[state], -np.inf)
        return int(np.argmax(q))

    def to_dict(self):
        d = self.disc
        return {
            "bins": {"net_lo": d.net_lo, "net_hi": d.net_hi, "n_net": d.n_net, "n_soc": d.n_soc},
            "shape": list(self.shape),
            "values": self.values.tolist(),
            "visits": self.visits.tolist(),
        }

    @classmethod
    def from_dict(cls, d):
        disc = Discretizer(**d["bins"])
        return cls(disc, np.array(d["values"], dtype=float), np.array(d["visits"], dtype=np.int64))

    def to_json(self):
        return json.dumps(self.to_dict(), separators=(",", ":"))


def epsilon_schedule(episode: int, episodes: int, start: float = 1.0, end: float = 0.02,
                     decay_fraction: float = 0.8) -> float:
    span = max(1.0, decay_fraction * episodes)
    return start + (end - start) * min(1.0, episode / span)


def _check_rates(alpha, gamma):
    if not 0 < alpha <= 1:
        raise DomainError("alpha must lie in (0, 1]")
    if not 0 <= gamma < 1:
        raise DomainError("gamma must lie in [0, 1)")


def qlearn_train(mg: Microgrid, episodes: int = 2000, alpha: float = 0.1, gamma: float = 0.95,
                 eps_start: float = 1.0, eps_end: float = 0.02, decay_fraction: float = 0.8,
                 seed: int = 0, n_net: int = 10, n_soc: int = 10, table: QTable | None = None) -> QTable:
    """Train a Q-table on the microgrid's training phase.

    Reward is the negative step cost divided by the load peak. Passing an
    existing ``table`` continues training it in place.
    """
    if alpha == 0:
        # degenerate learning rate: the table cannot change
        return table if table is not None else QTable.zeros(Discretizer.for_microgrid(mg, n_net, n_soc))
    _check_rates(alpha, gamma)
    if mg.split_boundary is None:
        raise SplitError("qlearn_train needs train_test_split() first")
    if table is None:
        table = QTable.zeros(Discretizer.for_microgrid(mg, n_net, n_soc))
    disc = table.disc
    start, end = mg.phase_bounds("train")
    length = end - start
    rng = np.random.default_rng(seed)
    soc0 = mg.config.battery.soc_init * mg.config.battery.capacity
    n_actions = table.values.shape[1]
    for ep in range(episodes):
        eps = epsilon_schedule(ep, episodes, eps_start, eps_end, decay_fraction)
        u = rng.random(length)
        ra = rng.integers(0, n_actions, length, dtype=np.int64)
        ret = K.q_episode(
            table.values, table.visits, mg.params, mg.load, mg.pv, mg.grid_up,
            mg.import_price, mg.export_price, start, end, soc0, eps, u, ra,
            alpha, gamma, disc.net_lo, disc.net_hi, disc.n_net, disc.n_soc, mg.load_peak,
        )
        table.returns.append(ret)
    return table


def tabular_q_learning(step: Callable, n_states: int, n_actions: int, episodes: int, episode_length: int,
                       start_state: int = 0, alpha: float = 0.1, gamma: float = 0.9, eps: float = 1.0,
                       seed: int = 0) -> np.ndarray:
    """Q-learning on an arbitrary finite MDP.

    ``step(state, action) -> (next_state, reward, terminal)``. Episodes run
    for ``episode_length`` steps unless a terminal transition ends them.
    """
    _check_rates(alpha, gamma)
    rng = np.random.default_rng(seed)
    Q = np.zeros((n_states, n_actions))
    for _ in range(episodes):
        s = start_state
        for _ in range(episode_length):
            if rng.random() < eps:
                a = int(rng.integers(n_actions))
            else:
                a = int(np.argmax(Q[s]))
            s2, r, terminal = step(s, a)
            target = r if terminal else r + gamma * Q[s2].max()
            Q[s, a] = (1.0 - alpha) * Q[s, a] + alpha * target
            if terminal:
                break
            s = s2
    return Q


def q_decide(table: QTable, obs: Observation, params, soc: float | None = None) -> ControlAction:
    return expand_template(table.greedy(discretize(obs, table.disc)), obs, params, soc)


class QLearningController(Controller):
    name = "q"

    def __init__(self, table: QTable):
        self.table = table

    @classmethod
    def train(cls, mg: Microgrid, **kwargs):
        return cls(qlearn_train(mg, **kwargs))

    def decide(self, mg: Microgrid) -> ControlAction:
        return q_decide(self.table, mg.observation(), mg, mg.soc)
