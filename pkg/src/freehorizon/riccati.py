"""Stationary discrete-time Riccati equation and LQR regulation.

The DARE is solved by fixed-point iteration of the Riccati recursion,

    P <- A'PA - A'PB (R + B'PB)^{-1} B'PA + Q,

started from P0 = Q. This is the value iteration of the underlying LQR
problem, so the iterates are monotone nondecreasing in the PSD order and
converge whenever (A, B) is stabilizable with detectable cost. Failure to
converge is how an uncontrollable linearization surfaces at runtime.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cost import QuadraticCost, incremental_cost
from .dynamics import (DynamicsModel, LinearizedSystem, NumericalBlowupError,
                       error_coords, rk4_step)
from .trajectory import Trajectory, assemble_trajectory

# rollouts are cut off once any state entry exceeds this magnitude
BLOWUP_LIMIT = 1e9


class RiccatiConvergenceError(RuntimeError):
    """The Riccati iteration did not converge (stabilizability suspect)."""


@dataclass(eq=False)
class RiccatiSolution:
    """DARE solution P_inf with the associated gain K (u = -K xe)."""

    P_inf: np.ndarray
    K: np.ndarray
    iterations: int
    residual: float


def dare_iteration_step(lin: LinearizedSystem, cost: QuadraticCost, P: np.ndarray) -> np.ndarray:
    """One Riccati recursion step; the fixed point solves the DARE."""
    A, B = lin.A, lin.B
    S = cost.R + B.T @ P @ B
    G = B.T @ P @ A
    Pn = A.T @ P @ A - G.T @ np.linalg.solve(S, G) + cost.Q
    return 0.5 * (Pn + Pn.T)


def dare_residual(lin: LinearizedSystem, cost: QuadraticCost, P: np.ndarray) -> float:
    """Infinity-norm of P minus the Riccati recursion applied to P."""
    return float(np.max(np.abs(P - dare_iteration_step(lin, cost, P))))


def solve_dare(lin: LinearizedSystem, cost: QuadraticCost, tol: float = 1e-10,
               max_iter: int = 100000) -> RiccatiSolution:
    """Solve the stationary Riccati equation by fixed-point iteration.

    Raises:
        RiccatiConvergenceError: no convergence within max_iter, which
            signals an unstabilizable linearization.
        np.linalg.LinAlgError: singular (R + B'PB).
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    P = cost.Q.copy()
    for it in range(1, max_iter + 1):
        Pn = dare_iteration_step(lin, cost, P)
        delta = float(np.max(np.abs(Pn - P)))
        P = Pn
        if delta <= tol:
            S = cost.R + lin.B.T @ P @ lin.B
            K = np.linalg.solve(S, lin.B.T @ P @ lin.A)
            return RiccatiSolution(P_inf=P, K=K, iterations=it,
                                   residual=dare_residual(lin, cost, P))
    raise RiccatiConvergenceError(
        f"Riccati iteration did not converge in {max_iter} iterations")


def lqr_rollout(model: DynamicsModel, K: np.ndarray, x0, steps: int, dt: float,
                cost: QuadraticCost) -> Trajectory:
    """Closed-loop nonlinear rollout under u = -K * error_coords(x).

    Divergence (numerical blowup outside the regulator's region of
    attraction) is reported via the trajectory's ``diverged`` flag with the
    finite prefix retained, not as an exception.
    """
    if steps < 0:
        raise ValueError("steps must be nonnegative")
    K = np.asarray(K, dtype=float)
    x = np.asarray(x0, dtype=float)
    states = [x]
    controls = []
    costs = []
    diverged = False
    for _ in range(steps):
        xe = error_coords(model, x)
        u = -K @ xe
        try:
            xn = rk4_step(model, x, u, dt)
        except NumericalBlowupError:
            diverged = True
            break
        if np.max(np.abs(xn)) > BLOWUP_LIMIT:
            diverged = True
            break
        controls.append(u)
        costs.append(incremental_cost(cost, xe, u))
        states.append(xn)
        x = xn
    n, p = model.n, model.p
    return assemble_trajectory(
        np.array(states).reshape(-1, n),
        np.array(controls, dtype=float).reshape(-1, p),
        np.array(costs, dtype=float),
        terminal_cost_value=0.0,
        diverged=diverged)
