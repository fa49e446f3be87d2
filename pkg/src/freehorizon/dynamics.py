"""Continuous-time plants, RK4 discretization, and goal-point linearization.

All plants are described by a continuous vector field ``g(x, u) -> dx/dt``
together with a goal equilibrium ``x_goal``. Solvers work in error
coordinates ``x - x_goal`` with angle entries wrapped onto the circle, so
that regulation is always "to the origin" regardless of where the goal
sits in raw coordinates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

VectorField = Callable[[np.ndarray, np.ndarray], np.ndarray]

TWO_PI = 2.0 * math.pi


class NumericalBlowupError(RuntimeError):
    """An integration or rollout produced non-finite values."""


@dataclass(eq=False)
class DynamicsModel:
    """A continuous-time control system with a designated goal equilibrium.

    Args:
        name: short identifier ("pendulum", "cartpole", ...).
        n: state dimension.
        p: control dimension.
        params: named physical constants (SI units).
        x_goal: the equilibrium to regulate to, in raw coordinates.
        g: continuous vector field, ``g(x, u) -> dx/dt``.
        angle_indices: state indices that live on the circle; their error
            coordinates are wrapped to [-pi, pi).
    """

    name: str
    n: int
    p: int
    params: dict[str, float]
    x_goal: np.ndarray
    g: VectorField
    angle_indices: tuple[int, ...] = ()

    def __post_init__(self):
        self.x_goal = np.asarray(self.x_goal, dtype=float)
        if self.x_goal.shape != (self.n,):
            raise ValueError(f"x_goal must have shape ({self.n},)")
        if any(i < 0 or i >= self.n for i in self.angle_indices):
            raise ValueError("angle_indices out of range")


@dataclass(eq=False)
class LinearizedSystem:
    """Discrete-time linearization x_{t+1} = A x_t + B u_t in error coordinates."""

    A: np.ndarray
    B: np.ndarray
    dt: float


def _check_state(model: DynamicsModel, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (model.n,):
        raise ValueError(f"state must have shape ({model.n},), got {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("state has non-finite entries")
    return x


def _check_control(model: DynamicsModel, u) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if u.shape != (model.p,):
        raise ValueError(f"control must have shape ({model.p},), got {u.shape}")
    if not np.all(np.isfinite(u)):
        raise ValueError("control has non-finite entries")
    return u


def wrap_angle(a):
    """Wrap angles to [-pi, pi). Accepts scalars or arrays."""
    return np.mod(a + math.pi, TWO_PI) - math.pi


def wrap_angles(model: DynamicsModel, v: np.ndarray) -> np.ndarray:
    """Wrap the angle entries of a state-space displacement ``v``."""
    if not model.angle_indices:
        return v
    out = np.array(v, dtype=float)
    idx = list(model.angle_indices)
    out[idx] = wrap_angle(out[idx])
    return out


def error_coords(model: DynamicsModel, x) -> np.ndarray:
    """Map a raw state to error coordinates x - x_goal with wrapped angles."""
    x = _check_state(model, x)
    return wrap_angles(model, x - model.x_goal)


def from_error_coords(model: DynamicsModel, xe) -> np.ndarray:
    """Inverse of :func:`error_coords` up to angle identification."""
    xe = np.asarray(xe, dtype=float)
    if xe.shape != (model.n,):
        raise ValueError(f"error state must have shape ({model.n},)")
    return model.x_goal + xe


def rk4_step(model: DynamicsModel, x, u, dt: float) -> np.ndarray:
    """One classical RK4 step with zero-order-hold control.

    Returns the raw (unwrapped) integration result; wrapping is applied
    only when converting to error coordinates.
    """
    x = _check_state(model, x)
    u = _check_control(model, u)
    if dt <= 0:
        raise ValueError("dt must be positive")
    g = model.g
    k1 = g(x, u)
    k2 = g(x + (0.5 * dt) * k1, u)
    k3 = g(x + (0.5 * dt) * k2, u)
    k4 = g(x + dt * k3, u)
    xn = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.all(np.isfinite(xn)):
        raise NumericalBlowupError("RK4 step produced non-finite state")
    return xn


def linearize_discrete(model: DynamicsModel, dt: float, eps: float = 1e-5) -> LinearizedSystem:
    """Discrete-time (A, B) of the error-coordinate step map at the goal.

    Central finite differences of ``xe -> error_coords(rk4_step(...))``
    evaluated at (0, 0), so A includes the dt integration rather than being
    the continuous Jacobian.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    n, p = model.n, model.p
    u0 = np.zeros(p)

    def step_err(xe, u):
        return error_coords(model, rk4_step(model, from_error_coords(model, xe), u, dt))

    A = np.zeros((n, n))
    for i in range(n):
        d = np.zeros(n)
        d[i] = eps
        A[:, i] = (step_err(d, u0) - step_err(-d, u0)) / (2.0 * eps)
    B = np.zeros((n, p))
    for j in range(p):
        d = np.zeros(p)
        d[j] = eps
        B[:, j] = (step_err(np.zeros(n), d) - step_err(np.zeros(n), -d)) / (2.0 * eps)
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(B))):
        raise NumericalBlowupError("non-finite entries in finite-difference Jacobian")
    return LinearizedSystem(A=A, B=B, dt=dt)


# ---------------------------------------------------------------------------
# Bundled models
# ---------------------------------------------------------------------------

PENDULUM_PARAMS = {"mass": 1.0, "length": 1.0, "gravity": 9.81, "damping": 0.1}

CARTPOLE_PARAMS = {
    "cart_mass": 1.0,
    "pole_mass": 0.1,
    "pole_length": 0.5,  # pivot-to-CoM distance (half the pole)
    "gravity": 9.81,
}


def pendulum(params: dict[str, float] | None = None, x_goal=None) -> DynamicsModel:
    """Damped pendulum, state (theta, theta_dot), torque input.

    theta = 0 is hanging down; the default goal (pi, 0) is the upright
    (unstable) equilibrium.
    """
    pp = dict(PENDULUM_PARAMS)
    if params:
        pp.update(params)
    m, length, grav, b = pp["mass"], pp["length"], pp["gravity"], pp["damping"]
    ml2 = m * length * length
    mgl = m * grav * length

    def field(x, u):
        theta, omega = x
        return np.array([omega, (u[0] - b * omega - mgl * math.sin(theta)) / ml2])

    goal = np.array([math.pi, 0.0]) if x_goal is None else np.asarray(x_goal, dtype=float)
    return DynamicsModel(name="pendulum", n=2, p=1, params=pp, x_goal=goal,
                         g=field, angle_indices=(0,))


def cartpole(params: dict[str, float] | None = None, x_goal=None) -> DynamicsModel:
    """Cart-pole, state (x, theta, x_dot, theta_dot), force input on the cart.

    theta = 0 is the pole hanging down; the default goal (0, pi, 0, 0) is
    pole-up over the track origin. Frictionless; the pole is modeled as a
    point mass at distance ``pole_length`` from the pivot.
    """
    pp = dict(CARTPOLE_PARAMS)
    if params:
        pp.update(params)
    mc, mp, length, grav = (pp["cart_mass"], pp["pole_mass"],
                            pp["pole_length"], pp["gravity"])

    def field(x, u):
        _, theta, xd, thd = x
        f = u[0]
        s = math.sin(theta)
        c = math.cos(theta)
        xdd = (f + mp * s * (length * thd * thd + grav * c)) / (mc + mp * s * s)
        thdd = -(xdd * c + grav * s) / length
        return np.array([xd, thd, xdd, thdd])

    goal = np.array([0.0, math.pi, 0.0, 0.0]) if x_goal is None else np.asarray(x_goal, dtype=float)
    return DynamicsModel(name="cartpole", n=4, p=1, params=pp, x_goal=goal,
                         g=field, angle_indices=(1,))


def linear_model(F, G, name: str = "linear") -> DynamicsModel:
    """Wrap continuous linear dynamics dx/dt = F x + G u as a DynamicsModel."""
    F = np.asarray(F, dtype=float)
    G = np.asarray(G, dtype=float)
    n = F.shape[0]
    if F.shape != (n, n) or G.shape[0] != n or G.ndim != 2:
        raise ValueError("F must be n x n and G must be n x p")
    p = G.shape[1]

    def field(x, u):
        return F @ x + G @ u

    return DynamicsModel(name=name, n=n, p=p, params={}, x_goal=np.zeros(n), g=field)


def double_integrator() -> DynamicsModel:
    """Double integrator: dx1/dt = x2, dx2/dt = u."""
    return linear_model([[0.0, 1.0], [0.0, 0.0]], [[0.0], [1.0]], name="double_integrator")


_MODEL_FACTORIES = {
    "pendulum": pendulum,
    "cartpole": cartpole,
}


def make_model(name: str, params: dict[str, float] | None = None, x_goal=None) -> DynamicsModel:
    """Build a bundled model by string id ("pendulum" or "cartpole")."""
    try:
        factory = _MODEL_FACTORIES[name]
    except KeyError:
        raise ValueError(f"unknown model {name!r}; choose from {sorted(_MODEL_FACTORIES)}") from None
    return factory(params=params, x_goal=x_goal)
