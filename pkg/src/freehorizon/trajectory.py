"""Time-indexed state/control sequences with cost bookkeeping."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(eq=False)
class Trajectory:
    """A discrete trajectory in raw coordinates.

    states has shape (T+1, n), controls (T, p), step_costs (T,). The
    bookkeeping identity total_cost = sum(step_costs) + terminal_cost_value
    holds by construction. ``diverged`` marks a rollout cut short by
    numerical blowup; the stored arrays then cover only the finite prefix.
    """

    states: np.ndarray
    controls: np.ndarray
    step_costs: np.ndarray
    terminal_cost_value: float
    total_cost: float
    diverged: bool = False

    def __post_init__(self):
        self.states = np.atleast_2d(np.asarray(self.states, dtype=float))
        self.controls = np.asarray(self.controls, dtype=float)
        if self.controls.ndim == 1:
            self.controls = self.controls.reshape(len(self.controls), -1)
        self.step_costs = np.asarray(self.step_costs, dtype=float)

    @property
    def horizon(self) -> int:
        return self.controls.shape[0]


def assemble_trajectory(states, controls, step_costs, terminal_cost_value: float,
                        diverged: bool = False) -> Trajectory:
    """Build a Trajectory, computing total_cost from its parts."""
    step_costs = np.asarray(step_costs, dtype=float)
    total = float(np.sum(step_costs) + terminal_cost_value)
    return Trajectory(states=np.asarray(states, dtype=float),
                      controls=np.asarray(controls, dtype=float),
                      step_costs=step_costs,
                      terminal_cost_value=float(terminal_cost_value),
                      total_cost=total,
                      diverged=diverged)
