"""CART classification trees and the tree-distilled Q-learning controller (QDT).

The tree imitates a trained Q-table: it is fit on (observation features,
Q-greedy action) pairs from a greedy rollout over the training phase and then
acts at test time, so discrete states the table never visited still get a
sensible action from nearby visited ones.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..core import ControlAction, Microgrid, Observation
from ..errors import DomainError
from .base import Controller, expand_template
from .qlearning import QTable, discretize, qlearn_train

FEATURES = ("hour_of_day", "net_load_norm", "soc_fraction")


@dataclass
class Node:
    label: int
    count: int
    feature: int = -1
    threshold: float = 0.0
    left: Optional["Node"] = None
    right: Optional["Node"] = None

    @property
    def is_leaf(self):
        return self.left is None

    def to_dict(self):
        if self.is_leaf:
            return {"label": self.label, "count": self.count}
        return {"label": self.label, "count": self.count, "feature": self.feature,
                "threshold": self.threshold, "left": self.left.to_dict(), "right": self.right.to_dict()}

    @classmethod
    def from_dict(cls, d):
        if "feature" not in d:
            return cls(d["label"], d["count"])
        return cls(d["label"], d["count"], d["feature"], d["threshold"],
                   cls.from_dict(d["left"]), cls.from_dict(d["right"]))


@dataclass
class DTModel:
    root: Node
    max_depth: Optional[int]
    min_leaf: int
    n_classes: int
    net_scale: float = 1.0  # divides (load - pv) to form the second feature

    def predict_one(self, x) -> int:
        node = self.root
        while not node.is_leaf:
            node = node.left if x[node.feature] < node.threshold else node.right
        return node.label

    def predict(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return np.array([self.predict_one(x) for x in X], dtype=np.int64)

    def depth(self) -> int:
        def walk(n):
            return 0 if n.is_leaf else 1 + max(walk(n.left), walk(n.right))
        return walk(self.root)

    def n_leaves(self) -> int:
        def walk(n):
            return 1 if n.is_leaf else walk(n.left) + walk(n.right)
        return walk(self.root)

    def to_dict(self):
        return {"features": list(FEATURES), "max_depth": self.max_depth, "min_leaf": self.min_leaf,
                "n_classes": self.n_classes, "net_scale": self.net_scale, "tree": self.root.to_dict()}

    @classmethod
    def from_dict(cls, d):
        return cls(Node.from_dict(d["tree"]), d["max_depth"], d["min_leaf"], d["n_classes"], d["net_scale"])

    def to_json(self):
        return json.dumps(self.to_dict(), separators=(",", ":"))

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def _gini_sum(counts, totals):
    # n * gini = n - sum(c^2)/n, summed over the rows of ``counts``
    with np.errstate(divide="ignore", invalid="ignore"):
        g = totals - (counts**2).sum(axis=-1) / totals
    return np.where(totals > 0, g, 0.0)


def _best_split(X, Y1, min_leaf):
    """Lowest weighted-Gini split as (feature, threshold, impurity) or None."""
    n = len(X)
    best = None
    for f in range(X.shape[1]):
        order = np.argsort(X[:, f], kind="stable")
        xs = X[order, f]
        left = np.cumsum(Y1[order], axis=0)[:-1]
        tot = left[-1] + Y1[order[-1]]
        # position i splits xs[:i+1] | xs[i+1:]
        ok = xs[1:] > xs[:-1]
        nl = np.arange(1, n, dtype=float)
        ok &= (nl >= min_leaf) & (n - nl >= min_leaf)
        if not ok.any():
            continue
        imp = _gini_sum(left, nl) + _gini_sum(tot - left, n - nl)
        imp = np.where(ok, imp, np.inf)
        i = int(np.argmin(imp))  # first minimum is the lowest threshold
        thr = 0.5 * (xs[i] + xs[i + 1])
        if best is None or imp[i] < best[2] - 1e-12:
            best = (f, float(thr), float(imp[i]))
    return best


def dt_fit(X, y, max_depth: Optional[int] = None, min_leaf: int = 1, n_classes: Optional[int] = None) -> DTModel:
    """Greedy CART fit minimizing Gini impurity.

    Splitting continues until a node is pure, reaches ``max_depth``, or has no
    threshold leaving ``min_leaf`` samples on both sides. Ties between splits
    go to the lowest feature index and then the lowest threshold; majority ties
    go to the lowest action index. Routing sends ``x < threshold`` left.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim == 1:
        X = X[:, None]
    if len(y) == 0:
        raise DomainError("dt_fit needs at least one sample")
    if len(X) != len(y):
        raise DomainError("feature and label counts differ")
    if max_depth is not None and max_depth < 0:
        raise DomainError("max_depth must be nonnegative")
    if min_leaf < 1:
        raise DomainError("min_leaf must be at least 1")
    k = int(y.max()) + 1 if n_classes is None else int(n_classes)
    Y1 = np.eye(k)[y]

    def grow(idx, depth):
        counts = Y1[idx].sum(axis=0)
        node = Node(int(np.argmax(counts)), len(idx))
        if counts.max() == len(idx) or (max_depth is not None and depth >= max_depth):
            return node
        split = _best_split(X[idx], Y1[idx], min_leaf)
        if split is None:
            return node
        node.feature, node.threshold = split[0], split[1]
        go_left = X[idx, node.feature] < node.threshold
        node.left = grow(idx[go_left], depth + 1)
        node.right = grow(idx[~go_left], depth + 1)
        return node

    return DTModel(grow(np.arange(len(y)), 0), max_depth, min_leaf, k)


def features(obs: Observation, net_scale: float) -> tuple:
    return (float(obs.hour_of_day), (obs.load_now - obs.pv_now) / net_scale, obs.soc_fraction)


def dt_decide(model: DTModel, obs: Observation, params, soc: float | None = None) -> ControlAction:
    return expand_template(model.predict_one(features(obs, model.net_scale)), obs, params, soc)


def distill_label(table: QTable, state: int, margin: float = 0.0, baseline: int = 0) -> int:
    """Table action for ``state``, falling back to ``baseline`` unless the table prefers another
    visited action by more than ``margin`` (in normalized-return units)."""
    a = table.greedy_visited(state)
    if a == baseline or table.visits[state, baseline] == 0:
        return a
    q = table.values[state]
    return a if q[a] - q[baseline] > margin else baseline


def distillation_samples(table: QTable, mg: Microgrid, phase: str = "train", margin: float = 0.0,
                         baseline: int = 0):
    """Features and table labels along a rollout of the labelled policy over ``phase``."""
    mg.reset(phase=phase)
    X, y = [], []
    while not mg.done:
        obs = mg.observation()
        a = distill_label(table, discretize(obs, table.disc), margin, baseline)
        X.append(features(obs, mg.load_peak))
        y.append(a)
        mg.run(expand_template(a, obs, mg, mg.soc))
    return np.array(X), np.array(y, dtype=np.int64)


def distill(table: QTable, mg: Microgrid, max_depth: Optional[int] = 8, min_leaf: int = 5,
            margin: float = 0.0, baseline: int = 0) -> DTModel:
    X, y = distillation_samples(table, mg, "train", margin, baseline)
    model = dt_fit(X, y, max_depth, min_leaf, n_classes=table.values.shape[1])
    model.net_scale = mg.load_peak
    return model


DEFAULT_MARGINS = (math.inf, 0.3, 0.1, 0.03, 0.01, 0.0)
DEFAULT_DEPTHS = (4, 8)


class QDTController(Controller):
    """Acts through a tree distilled from a Q-table.

    ``train`` fits one tree per (depth, margin) candidate, from the most
    conservative to the most table-driven, and keeps a later candidate only if
    it lowers the training-phase cost by more than ``min_gain`` (relative to
    the first candidate). The margin sets how strongly the table must prefer
    an action over the rule-based template before the tree learns to deviate.
    """

    name = "qdt"

    def __init__(self, model: DTModel, table: Optional[QTable] = None, selection: Optional[dict] = None):
        self.model = model
        self.table = table
        self.selection = selection or {}

    @classmethod
    def train(cls, mg: Microgrid, table: Optional[QTable] = None, depths=DEFAULT_DEPTHS,
              margins=DEFAULT_MARGINS, min_leaf: int = 5, min_gain: float = 1e-3, **q_kwargs):
        if table is None:
            table = qlearn_train(mg, **q_kwargs)
        from .evaluate import evaluate_controller

        best = None
        for m in margins:
            for depth in depths:
                model = distill(table, mg, depth, min_leaf, m)
                cost = evaluate_controller(cls(model), mg, "train")
                if best is None:
                    best, slack = (cost, model, depth, m), min_gain * abs(cost)
                elif cost < best[0] - slack:
                    best = (cost, model, depth, m)
        cost, model, depth, m = best
        return cls(model, table, {"max_depth": depth, "margin": m, "train_cost": cost})

    def decide(self, mg: Microgrid) -> ControlAction:
        return dt_decide(self.model, mg.observation(), mg, mg.soc)
