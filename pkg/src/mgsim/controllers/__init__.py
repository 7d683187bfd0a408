"""Benchmark controllers: rule-based, MPC, tabular Q-learning and tree-distilled Q-learning."""
from .base import Controller, expand_template
from .evaluate import GROUPS, EvalReport, evaluate_controller
from .mpc import Forecast, MPCController, mpc_build, mpc_decide, perfect_forecast
from .qlearning import Discretizer, QLearningController, QTable, discretize, q_decide, qlearn_train, tabular_q_learning
from .rbc import RuleBasedController, rbc_decide
from .tree import DTModel, QDTController, distill, dt_decide, dt_fit

CONTROLLER_NAMES = ("rbc", "mpc", "q", "qdt")

__all__ = [
    "CONTROLLER_NAMES", "Controller", "DTModel", "Discretizer", "EvalReport", "Forecast", "GROUPS",
    "MPCController", "QDTController", "QLearningController", "QTable", "RuleBasedController",
    "discretize", "distill", "dt_decide", "dt_fit", "evaluate_controller", "expand_template",
    "mpc_build", "mpc_decide", "perfect_forecast", "q_decide", "qlearn_train", "rbc_decide",
    "tabular_q_learning",
]
