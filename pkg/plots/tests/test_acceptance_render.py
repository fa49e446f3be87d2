"""Rendering gate: figures for the four benchmark runs.

Consumes the solver's benchmark outputs from results/acceptance/ (written
by the solver package's acceptance suite). Missing directories are
regenerated through the solver CLI, which is the only coupling between the
two packages.
"""

import json
import os
import subprocess
import sys

import pytest

from freehorizon_plots import build_figure, render, spec_for_directory

RESULTS = os.path.abspath(os.path.join(os.path.dirname(__file__), os.pardir,
                                       os.pardir, "results", "acceptance"))


def _ensure_outputs(eid: int) -> str:
    out = os.path.join(RESULTS, f"exp{eid}")
    needed = ["sweep.csv", "solution.json", "trajectory.csv", "trajectory_T4.csv"]
    if not all(os.path.exists(os.path.join(out, name)) for name in needed):
        subprocess.run(
            ["freehorizon", "experiment", str(eid), "--out", out,
             "--emit-trajectories"],
            check=True, capture_output=True, text=True)
    return out


@pytest.fixture(scope="module", params=[1, 2, 3, 4])
def benchmark_dir(request):
    return request.param, _ensure_outputs(request.param)


def _axvline_xs(ax):
    return [ln.get_xdata()[0] for ln in ax.get_lines()
            if len(set(ln.get_xdata())) == 1]


def _axhline_ys(ax):
    return [ln.get_ydata()[0] for ln in ax.get_lines()
            if len(set(ln.get_ydata())) == 1 and len(set(ln.get_xdata())) > 1]


def test_convergence_and_response_render(benchmark_dir, tmp_path):
    eid, out_dir = benchmark_dir
    for kind in ("convergence", "response"):
        path = render(spec_for_directory(kind, out_dir),
                      str(tmp_path / f"exp{eid}_{kind}.png"))
        assert os.path.getsize(path) > 0


def test_convergence_markers_match_solution(benchmark_dir):
    eid, out_dir = benchmark_dir
    with open(os.path.join(out_dir, "solution.json")) as fh:
        payload = json.load(fh)
    figspec = spec_for_directory("convergence", out_dir)
    fig = build_figure(figspec)
    ax = fig.axes[0]
    assert payload["surrogate_cost"] in _axhline_ys(ax)
    assert payload["solution"]["T_star"] in _axvline_xs(ax)
    import matplotlib.pyplot as plt
    plt.close(fig)


def test_short_transfer_response_marks_phase_boundary(tmp_path):
    # the T=4 handoff: the jump between open-loop transfer and regulation
    # must be visibly marked at step 4 on every panel
    out_dir = _ensure_outputs(1)
    figspec = spec_for_directory("response", out_dir, trajectory_file="trajectory_T4.csv")
    fig = build_figure(figspec)
    assert len(fig.axes) == 5  # four states + one control
    for ax in fig.axes:
        assert 4 in _axvline_xs(ax)
    import matplotlib.pyplot as plt
    plt.close(fig)
    path = render(figspec, str(tmp_path / "exp1_response_T4.png"))
    assert os.path.getsize(path) > 0
