"""Render solver result files as figures.

Every number shown comes from the solver's sweep.csv / solution.json /
trajectory.csv files; this package computes nothing of its own, so the
solver stays the single source of truth. Rendering is a pure function of
the input files: identical inputs give byte-identical images.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import matplotlib
matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

FIGURE_KINDS = ("convergence", "regulation", "terminal_error", "response")

SWEEP_COLUMNS = ("T", "fh_cost", "transfer_cost", "expected_regulation_cost",
                 "actual_regulation_cost", "total_composite_cost",
                 "terminal_error", "hit_omega", "solver_iterations")


class SchemaError(ValueError):
    """An input file does not match the expected schema."""


@dataclass
class FigureSpec:
    """What to draw and from which files.

    baseline is the surrogate long-horizon cost drawn as a horizontal
    reference line; t_star marks the hitting time as a vertical line.
    """

    kind: str
    sweep_path: str | None = None
    solution_path: str | None = None
    trajectory_path: str | None = None
    baseline: float | None = None
    t_star: int | None = None

    def __post_init__(self):
        if self.kind not in FIGURE_KINDS:
            raise SchemaError(f"unknown figure kind {self.kind!r}; "
                              f"choose from {FIGURE_KINDS}")


# ---------------------------------------------------------------------------
# Input loading
# ---------------------------------------------------------------------------

def _read_rows(path):
    with open(path) as handle:
        lines = [ln.rstrip("\n") for ln in handle if ln.strip()]
    if not lines:
        raise SchemaError(f"{path}: empty file")
    return lines[0].split(","), [ln.split(",") for ln in lines[1:]]


def load_sweep(path: str) -> dict[str, np.ndarray]:
    """Parse sweep.csv into named columns, validating the exact schema."""
    header, rows = _read_rows(path)
    for expected, got in zip(SWEEP_COLUMNS, header):
        if expected != got:
            raise SchemaError(f"{path}: expected column {expected!r}, found {got!r}")
    if len(header) != len(SWEEP_COLUMNS):
        extra = header[len(SWEEP_COLUMNS):] or ["<missing>"]
        raise SchemaError(f"{path}: unexpected column {extra[0]!r}")
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    cols: dict[str, list] = {name: [] for name in SWEEP_COLUMNS}
    for row in rows:
        if len(row) != len(SWEEP_COLUMNS):
            raise SchemaError(f"{path}: row with {len(row)} fields, "
                              f"expected {len(SWEEP_COLUMNS)}")
        for name, cell in zip(SWEEP_COLUMNS, row):
            if name == "hit_omega":
                if cell not in ("true", "false"):
                    raise SchemaError(f"{path}: column 'hit_omega' has "
                                      f"non-boolean value {cell!r}")
                cols[name].append(cell == "true")
            else:
                try:
                    cols[name].append(float(cell))
                except ValueError:
                    raise SchemaError(f"{path}: column {name!r} has "
                                      f"non-numeric value {cell!r}") from None
    out = {name: np.array(vals) for name, vals in cols.items()}
    out["T"] = out["T"].astype(int)
    out["solver_iterations"] = out["solver_iterations"].astype(int)
    return out


def load_solution(path: str) -> dict:
    """Parse solution.json, checking the fields the figures use."""
    try:
        with open(path) as handle:
            payload = json.load(handle)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON ({exc})") from None
    if "surrogate_cost" not in payload:
        raise SchemaError(f"{path}: missing field 'surrogate_cost'")
    if "solution" not in payload or "T_star" not in payload["solution"]:
        raise SchemaError(f"{path}: missing field 'solution.T_star'")
    return payload


def load_trajectory(path: str):
    """Parse trajectory.csv -> (t, phases, states, controls)."""
    header, rows = _read_rows(path)
    if header[:2] != ["t", "phase"]:
        got = header[0] if header else "<none>"
        raise SchemaError(f"{path}: expected leading columns 't,phase', found {got!r}")
    state_names = [c for c in header[2:] if c.startswith("x")]
    control_names = [c for c in header[2:] if c.startswith("u")]
    if len(state_names) + len(control_names) != len(header) - 2:
        bad = next(c for c in header[2:] if not (c.startswith("x") or c.startswith("u")))
        raise SchemaError(f"{path}: unexpected column {bad!r}")
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    n, p = len(state_names), len(control_names)
    ts, phases, states, controls = [], [], [], []
    for row in rows:
        if len(row) != len(header):
            raise SchemaError(f"{path}: row with {len(row)} fields, "
                              f"expected {len(header)}")
        if row[1] not in ("transfer", "regulate"):
            raise SchemaError(f"{path}: column 'phase' has invalid value {row[1]!r}")
        ts.append(int(row[0]))
        phases.append(row[1])
        states.append([float(v) for v in row[2:2 + n]])
        controls.append([float(v) for v in row[2 + n:]])
    return (np.array(ts), phases, np.array(states).reshape(-1, n),
            np.array(controls).reshape(-1, p))


def spec_for_directory(kind: str, in_dir: str,
                       trajectory_file: str | None = None) -> FigureSpec:
    """Resolve a FigureSpec from a solver output directory."""
    sweep = os.path.join(in_dir, "sweep.csv")
    solution = os.path.join(in_dir, "solution.json")
    trajectory = os.path.join(in_dir, trajectory_file or "trajectory.csv")
    baseline = None
    t_star = None
    if os.path.exists(solution):
        payload = load_solution(solution)
        baseline = float(payload["surrogate_cost"])
        t_star = int(payload["solution"]["T_star"])
    return FigureSpec(kind=kind, sweep_path=sweep, solution_path=solution,
                      trajectory_path=trajectory, baseline=baseline, t_star=t_star)


# ---------------------------------------------------------------------------
# Figure construction
# ---------------------------------------------------------------------------

def _require(figspec, attr):
    value = getattr(figspec, attr)
    if value is None:
        raise SchemaError(f"figure kind {figspec.kind!r} needs {attr}")
    return value


def _mark_t_star(ax, t_star):
    if t_star is not None and t_star > 0:
        ax.axvline(t_star, color="black", linewidth=1.2, label=f"T* = {t_star}")


def build_figure(figspec: FigureSpec):
    """Build the matplotlib Figure for a spec (callers own closing it)."""
    if figspec.kind == "convergence":
        sweep = load_sweep(_require(figspec, "sweep_path"))
        fig, ax = plt.subplots(figsize=(6.4, 4.2))
        ax.plot(sweep["T"], sweep["total_composite_cost"], "o-", ms=3.5,
                label="transfer + regulation")
        ax.plot(sweep["T"], sweep["fh_cost"], "s--", ms=3, label="horizon value")
        if figspec.baseline is not None:
            ax.axhline(figspec.baseline, color="tab:red", linestyle=":",
                       label="long-horizon surrogate")
        _mark_t_star(ax, figspec.t_star)
        finite = sweep["total_composite_cost"][np.isfinite(sweep["total_composite_cost"])]
        if finite.size and figspec.baseline is not None:
            top = max(3.0 * figspec.baseline, float(np.max(sweep["fh_cost"])))
            ax.set_ylim(0.0, min(float(np.max(finite)), top) * 1.05)
        ax.set_xlabel("transfer horizon T (steps)")
        ax.set_ylabel("total cost")
        ax.set_title("Cost convergence over the transfer horizon")
    elif figspec.kind == "regulation":
        sweep = load_sweep(_require(figspec, "sweep_path"))
        fig, ax = plt.subplots(figsize=(6.4, 4.2))
        ax.semilogy(sweep["T"], sweep["expected_regulation_cost"], "o-", ms=3.5,
                    label="expected (x'Px at handoff)")
        ax.semilogy(sweep["T"], sweep["actual_regulation_cost"], "s--", ms=3,
                    label="actual (simulated tail)")
        _mark_t_star(ax, figspec.t_star)
        ax.set_xlabel("transfer horizon T (steps)")
        ax.set_ylabel("regulation cost")
        ax.set_title("Expected vs actual regulation cost")
    elif figspec.kind == "terminal_error":
        sweep = load_sweep(_require(figspec, "sweep_path"))
        fig, ax = plt.subplots(figsize=(6.4, 4.2))
        ax.semilogy(sweep["T"], sweep["terminal_error"], "o-", ms=3.5,
                    label="|error| at handoff")
        _mark_t_star(ax, figspec.t_star)
        ax.set_xlabel("transfer horizon T (steps)")
        ax.set_ylabel("terminal error norm")
        ax.set_title("Error at the end of the transfer")
    else:  # response
        ts, phases, states, controls = load_trajectory(_require(figspec, "trajectory_path"))
        n, p = states.shape[1], controls.shape[1]
        fig, axes = plt.subplots(n + p, 1, figsize=(6.4, 1.6 * (n + p)),
                                 sharex=True)
        axes = np.atleast_1d(axes)
        boundary = next((int(t) for t, ph in zip(ts, phases) if ph == "regulate"), None)
        for i in range(n):
            axes[i].plot(ts, states[:, i], lw=1.2)
            axes[i].set_ylabel(f"x{i}")
        for j in range(p):
            ax = axes[n + j]
            ax.step(ts, controls[:, j], lw=1.2, where="post", color="tab:orange")
            ax.set_ylabel(f"u{j}")
        for ax in axes:
            if boundary is not None:
                ax.axvline(boundary, color="black", linewidth=1.2)
        axes[-1].set_xlabel("step")
        axes[0].set_title("Composite response (phase boundary marked)")
        fig.align_ylabels(axes)
        fig.tight_layout()
        return fig

    ax.legend(loc="best", fontsize=9)
    fig.tight_layout()
    return fig


def render(figspec: FigureSpec, out_path: str) -> str:
    """Render a figure spec to an image file; returns the output path."""
    fig = build_figure(figspec)
    try:
        fig.savefig(out_path, dpi=130)
    finally:
        plt.close(fig)
    return out_path
