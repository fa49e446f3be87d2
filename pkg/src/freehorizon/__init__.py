"""Infinite-horizon nonlinear optimal control via a finite free-final-time
transfer into a Riccati level set, followed by stationary LQR regulation."""

__version__ = "0.1.0"

from .cost import QuadraticCost, TerminalCost, default_cost, incremental_cost, terminal_cost_eval
from .dynamics import (DynamicsModel, LinearizedSystem, NumericalBlowupError, cartpole,
                       double_integrator, error_coords, from_error_coords, linear_model,
                       linearize_discrete, make_model, pendulum, rk4_step, wrap_angle)
from .ilqr import IlqrOptions, IlqrResult, evaluate_controls, solve_fhocp
from .regularizer import (DecreaseReport, LevelSelectionError, RegularizedSolution,
                          SweepRecord, SweepResult, TerminalSet, clf_decrease_check,
                          composite_rollout, horizon_sweep, select_level,
                          solve_free_final_time)
from .riccati import (RiccatiConvergenceError, RiccatiSolution, dare_iteration_step,
                      dare_residual, lqr_rollout, solve_dare)
from .trajectory import Trajectory, assemble_trajectory

__all__ = [
    "__version__",
    "QuadraticCost", "TerminalCost", "default_cost", "incremental_cost", "terminal_cost_eval",
    "DynamicsModel", "LinearizedSystem", "NumericalBlowupError", "cartpole",
    "double_integrator", "error_coords", "from_error_coords", "linear_model",
    "linearize_discrete", "make_model", "pendulum", "rk4_step", "wrap_angle",
    "IlqrOptions", "IlqrResult", "evaluate_controls", "solve_fhocp",
    "DecreaseReport", "LevelSelectionError", "RegularizedSolution", "SweepRecord",
    "SweepResult", "TerminalSet", "clf_decrease_check", "composite_rollout",
    "horizon_sweep", "select_level", "solve_free_final_time",
    "RiccatiConvergenceError", "RiccatiSolution", "dare_iteration_step",
    "dare_residual", "lqr_rollout", "solve_dare",
    "Trajectory", "assemble_trajectory",
]
