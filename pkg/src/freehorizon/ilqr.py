"""Iterative LQR for the fixed-horizon problem with an arbitrary terminal cost.

Minimizes sum_t c(x_t, u_t) + Phi(x_T) over open-loop controls subject to
the RK4-discretized dynamics. Standard Gauss-Newton iLQR: linearize the
dynamics along the nominal trajectory by central finite differences,
expand the (exactly quadratic) cost, solve the Riccati-like backward
recursion for feedforward/feedback gains, then backtrack a line search on
the true rollout cost. A Levenberg-style additive regularization on Q_uu
guards the backward pass.

The floored terminal cost max(x'Px, M) is non-smooth on the level set
boundary; the backward pass uses the active branch's derivatives (zero
gradient and Hessian when the floor is active) while the line search
always compares exact objective values.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .cost import QuadraticCost, TerminalCost, incremental_cost, terminal_cost_eval
from .dynamics import DynamicsModel, NumericalBlowupError, error_coords, rk4_step, wrap_angles
from .trajectory import Trajectory, assemble_trajectory

_STATE_LIMIT = 1e9


def _default_alphas() -> tuple[float, ...]:
    return tuple(0.5 ** i for i in range(11))


@dataclass
class IlqrOptions:
    """Solver hyperparameters; the defaults are the test-pinned values."""

    max_iterations: int = 500
    convergence_tol: float = 1e-7
    reg_init: float = 1e-6
    reg_min: float = 1e-8
    reg_max: float = 1e8
    reg_scale: float = 10.0
    line_search_alphas: tuple[float, ...] = field(default_factory=_default_alphas)
    fd_eps: float = 1e-5

    def __post_init__(self):
        if not (self.reg_min <= self.reg_init <= self.reg_max):
            raise ValueError("require reg_min <= reg_init <= reg_max")
        alphas = tuple(self.line_search_alphas)
        if not alphas or alphas[0] != 1.0:
            raise ValueError("line_search_alphas must start at 1.0")
        if any(b >= a for a, b in zip(alphas, alphas[1:])):
            raise ValueError("line_search_alphas must be strictly descending")
        self.line_search_alphas = alphas


@dataclass(eq=False)
class IlqrResult:
    trajectory: Trajectory
    converged: bool
    iterations: int
    cost_history: list[float]
    feedback_gains: np.ndarray  # (T, p, n), from the last backward pass


def evaluate_controls(model: DynamicsModel, cost: QuadraticCost, tc: TerminalCost,
                      x0, controls, dt: float) -> Trajectory:
    """Deterministic open-loop rollout with cost bookkeeping.

    Raises:
        NumericalBlowupError: the rollout left the finite range; the
            message carries the offending step index.
    """
    controls = np.asarray(controls, dtype=float)
    if controls.ndim == 1:
        controls = controls.reshape(-1, model.p)
    T = controls.shape[0]
    x = np.asarray(x0, dtype=float)
    states = np.zeros((T + 1, model.n))
    states[0] = x
    step_costs = np.zeros(T)
    for t in range(T):
        xe = error_coords(model, x)
        u = controls[t]
        step_costs[t] = incremental_cost(cost, xe, u)
        try:
            x = rk4_step(model, x, u, dt)
        except NumericalBlowupError as exc:
            raise NumericalBlowupError(f"rollout blew up at step {t}") from exc
        if np.max(np.abs(x)) > _STATE_LIMIT:
            raise NumericalBlowupError(f"rollout blew up at step {t}")
        states[t + 1] = x
    terminal = terminal_cost_eval(tc, error_coords(model, states[T]))
    return assemble_trajectory(states, controls, step_costs, terminal)


def _linearize_step(model, x, u, dt, eps):
    n, p = model.n, model.p
    A = np.zeros((n, n))
    for i in range(n):
        d = np.zeros(n)
        d[i] = eps
        A[:, i] = (rk4_step(model, x + d, u, dt) - rk4_step(model, x - d, u, dt)) / (2 * eps)
    B = np.zeros((n, p))
    for j in range(p):
        d = np.zeros(p)
        d[j] = eps
        B[:, j] = (rk4_step(model, x, u + d, dt) - rk4_step(model, x, u - d, dt)) / (2 * eps)
    return A, B


def _terminal_expansion(tc: TerminalCost, xe):
    """Value, gradient, Hessian of Phi at xe (active branch for the floor)."""
    n = len(xe)
    if tc.kind == "none":
        return 0.0, np.zeros(n), np.zeros((n, n))
    quad = float(xe @ tc.P @ xe)
    if tc.kind == "riccati_floored" and quad < tc.M:
        return tc.M, np.zeros(n), np.zeros((n, n))
    return quad, 2.0 * (tc.P @ xe), 2.0 * tc.P


def _backward_pass(model, cost, tc, traj, A_seq, B_seq, lam):
    """Gauss-Newton backward recursion; returns gains and the expected
    quadratic-model improvement terms, or None if Q_uu fails Cholesky."""
    T = traj.horizon
    n, p = model.n, model.p
    xe_T = error_coords(model, traj.states[T])
    _, Vx, Vxx = _terminal_expansion(tc, xe_T)

    ks = np.zeros((T, p))
    Ks = np.zeros((T, p, n))
    dV1 = 0.0
    dV2 = 0.0
    lam_eye = lam * np.eye(p)
    twoQ = 2.0 * cost.Q
    twoR = 2.0 * cost.R
    for t in range(T - 1, -1, -1):
        xe = error_coords(model, traj.states[t])
        u = traj.controls[t]
        A, B = A_seq[t], B_seq[t]

        Qx = twoQ @ xe + A.T @ Vx
        Qu = twoR @ u + B.T @ Vx
        Qxx = twoQ + A.T @ Vxx @ A
        Quu = twoR + B.T @ Vxx @ B + lam_eye
        Qux = B.T @ Vxx @ A

        try:
            np.linalg.cholesky(Quu)
        except np.linalg.LinAlgError:
            return None
        k = -np.linalg.solve(Quu, Qu)
        K = -np.linalg.solve(Quu, Qux)
        ks[t] = k
        Ks[t] = K

        dV1 += float(k @ Qu)
        dV2 += 0.5 * float(k @ Quu @ k)

        Vx = Qx + K.T @ Quu @ k + K.T @ Qu + Qux.T @ k
        Vxx = Qxx + K.T @ Quu @ K + K.T @ Qux + Qux.T @ K
        Vxx = 0.5 * (Vxx + Vxx.T)
    return ks, Ks, dV1, dV2


def _forward_pass(model, cost, tc, nominal, ks, Ks, alpha, dt):
    """Roll out the gain update at step size alpha; None on blowup."""
    T = nominal.horizon
    states = np.zeros_like(nominal.states)
    controls = np.zeros_like(nominal.controls)
    step_costs = np.zeros(T)
    x = nominal.states[0]
    states[0] = x
    for t in range(T):
        dx = wrap_angles(model, x - nominal.states[t])
        u = nominal.controls[t] + alpha * ks[t] + Ks[t] @ dx
        if not np.all(np.isfinite(u)):
            return None
        xe = error_coords(model, x)
        step_costs[t] = incremental_cost(cost, xe, u)
        controls[t] = u
        try:
            x = rk4_step(model, x, u, dt)
        except NumericalBlowupError:
            return None
        if np.max(np.abs(x)) > _STATE_LIMIT:
            return None
        states[t + 1] = x
    terminal = terminal_cost_eval(tc, error_coords(model, states[T]))
    return assemble_trajectory(states, controls, step_costs, terminal)


def solve_fhocp(model: DynamicsModel, cost: QuadraticCost, tc: TerminalCost,
                x0, T: int, dt: float, init_controls=None,
                opts: IlqrOptions | None = None) -> IlqrResult:
    """Solve the fixed-horizon problem from x0 over T steps.

    init_controls warm-starts the solve (length T); zeros otherwise.
    Non-convergence within max_iterations returns converged=False rather
    than raising, so callers can decide what failure means.
    """
    if T < 1:
        raise ValueError("T must be at least 1")
    opts = opts if opts is not None else IlqrOptions()
    if init_controls is None:
        controls = np.zeros((T, model.p))
    else:
        controls = np.array(init_controls, dtype=float).reshape(T, model.p)

    traj = evaluate_controls(model, cost, tc, x0, controls, dt)
    J = traj.total_cost
    cost_history = [J]
    lam = opts.reg_init
    converged = False
    feedback = np.zeros((T, model.p, model.n))
    iterations = 0

    for it in range(1, opts.max_iterations + 1):
        iterations = it
        A_seq = []
        B_seq = []
        for t in range(T):
            A, B = _linearize_step(model, traj.states[t], traj.controls[t], dt, opts.fd_eps)
            A_seq.append(A)
            B_seq.append(B)

        bp = _backward_pass(model, cost, tc, traj, A_seq, B_seq, lam)
        if bp is None:
            lam *= opts.reg_scale
            if lam > opts.reg_max:
                break
            continue
        ks, Ks, dV1, dV2 = bp
        feedback = Ks

        expected_decrease = -(dV1 + dV2)
        if expected_decrease < opts.convergence_tol * (1.0 + abs(J)):
            converged = True
            break

        accepted = None
        for alpha in opts.line_search_alphas:
            candidate = _forward_pass(model, cost, tc, traj, ks, Ks, alpha, dt)
            if candidate is not None and candidate.total_cost < J:
                accepted = candidate
                break

        if accepted is None:
            lam *= opts.reg_scale
            if lam > opts.reg_max:
                break
            continue

        delta = J - accepted.total_cost
        traj = accepted
        J = accepted.total_cost
        cost_history.append(J)
        lam = max(lam / 2.0, opts.reg_min)
        if delta < opts.convergence_tol * (1.0 + abs(J)):
            converged = True
            break

    return IlqrResult(trajectory=traj, converged=converged, iterations=iterations,
                      cost_history=cost_history, feedback_gains=feedback)
