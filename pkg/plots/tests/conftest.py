import json

import pytest

SWEEP_HEADER = ("T,fh_cost,transfer_cost,expected_regulation_cost,"
                "actual_regulation_cost,total_composite_cost,terminal_error,"
                "hit_omega,solver_iterations")


def sweep_line(T, fh, transfer, expected, actual, hit):
    total = transfer + actual
    err = expected ** 0.5
    return (f"{T},{fh:.17g},{transfer:.17g},{expected:.17g},{actual:.17g},"
            f"{total:.17g},{err:.17g},{'true' if hit else 'false'},3")


@pytest.fixture
def sample_dir(tmp_path):
    """A synthetic solver output directory matching the file schemas."""
    rows = [sweep_line(T, fh, tr, ex, ex * 1.1, ex <= 0.5)
            for T, fh, tr, ex in [
                (1, 9.0, 2.0, 7.0, ), (2, 7.0, 3.0, 4.0), (3, 6.2, 4.0, 2.2),
                (4, 6.05, 5.0, 1.05), (5, 6.01, 5.6, 0.41), (6, 6.0, 5.8, 0.2),
            ]]
    (tmp_path / "sweep.csv").write_text(SWEEP_HEADER + "\n" + "\n".join(rows) + "\n")
    (tmp_path / "solution.json").write_text(json.dumps({
        "solution": {"T_star": 5, "J_M": 6.1, "hit": True, "M": 0.5},
        "surrogate_cost": 5.95,
    }))
    traj_lines = ["t,phase,x0,x1,u0"]
    for t in range(20):
        phase = "transfer" if t < 5 else "regulate"
        traj_lines.append(f"{t},{phase},{0.1 * t:.17g},{-0.05 * t:.17g},{1.0 / (t + 1):.17g}")
    (tmp_path / "trajectory.csv").write_text("\n".join(traj_lines) + "\n")
    return tmp_path
