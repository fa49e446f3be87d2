"""Quadratic incremental cost and terminal cost candidates.

The incremental cost is c(x, u) = x'Qx + u'Ru evaluated in error
coordinates. Costs are accumulated per discrete step as a plain sum, with
no dt scaling. Terminal costs come in three kinds: none, the Riccati
quadratic x'Px, and the same quadratic floored from below by a level M.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

TERMINAL_KINDS = ("none", "riccati", "riccati_floored")


def _check_symmetric_psd(mat: np.ndarray, name: str, positive_definite: bool = False):
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError(f"{name} must be a square matrix")
    if not np.allclose(mat, mat.T, atol=1e-12):
        raise ValueError(f"{name} must be symmetric")
    eigs = np.linalg.eigvalsh(mat)
    if positive_definite:
        if eigs.min() <= 0:
            raise ValueError(f"{name} must be positive definite")
    elif eigs.min() < -1e-10:
        raise ValueError(f"{name} must be positive semidefinite")


@dataclass(eq=False)
class QuadraticCost:
    """State weight Q (symmetric PSD) and control weight R (symmetric PD)."""

    Q: np.ndarray
    R: np.ndarray

    def __post_init__(self):
        self.Q = np.asarray(self.Q, dtype=float)
        self.R = np.asarray(self.R, dtype=float)
        _check_symmetric_psd(self.Q, "Q")
        _check_symmetric_psd(self.R, "R", positive_definite=True)


@dataclass(eq=False)
class TerminalCost:
    """Terminal cost Phi(x); kind selects none, x'Px, or max(x'Px, M)."""

    kind: str
    P: np.ndarray | None = None
    M: float = 0.0

    def __post_init__(self):
        if self.kind not in TERMINAL_KINDS:
            raise ValueError(f"kind must be one of {TERMINAL_KINDS}")
        if self.kind != "none":
            if self.P is None:
                raise ValueError("P is required for riccati terminal kinds")
            self.P = np.asarray(self.P, dtype=float)
            _check_symmetric_psd(self.P, "P")
        if self.M < 0:
            raise ValueError("M must be nonnegative")

    @classmethod
    def none(cls) -> "TerminalCost":
        return cls(kind="none")

    @classmethod
    def riccati(cls, P) -> "TerminalCost":
        return cls(kind="riccati", P=P)

    @classmethod
    def riccati_floored(cls, P, M: float) -> "TerminalCost":
        return cls(kind="riccati_floored", P=P, M=float(M))


def incremental_cost(cost: QuadraticCost, xe, u) -> float:
    """c(xe, u) = xe'Q xe + u'R u for an error-coordinate state."""
    xe = np.asarray(xe, dtype=float)
    u = np.asarray(u, dtype=float)
    if xe.shape != (cost.Q.shape[0],):
        raise ValueError("state dimension does not match Q")
    if u.shape != (cost.R.shape[0],):
        raise ValueError("control dimension does not match R")
    return float(xe @ cost.Q @ xe + u @ cost.R @ u)


def terminal_cost_eval(tc: TerminalCost, xe) -> float:
    """Evaluate the terminal cost at an error-coordinate state."""
    if tc.kind == "none":
        return 0.0
    xe = np.asarray(xe, dtype=float)
    if xe.shape != (tc.P.shape[0],):
        raise ValueError("state dimension does not match P")
    quad = float(xe @ tc.P @ xe)
    if tc.kind == "riccati":
        return quad
    return max(quad, tc.M)


DEFAULT_WEIGHTS = {
    "pendulum": ([1.0, 0.1], [[0.1]]),
    "cartpole": ([1.0, 1.0, 0.1, 0.1], [[0.1]]),
}


def default_cost(model_name: str) -> QuadraticCost:
    """Bundled (Q, R) weights for a model id."""
    try:
        q_diag, r = DEFAULT_WEIGHTS[model_name]
    except KeyError:
        raise ValueError(f"no default weights for model {model_name!r}") from None
    return QuadraticCost(Q=np.diag(q_diag), R=np.array(r))
