"""The regularized cost-to-go decreases along the closed loop.

Sampling J_M outside the level set (by re-solving the free-final-time
problem) and x'Px inside it yields a strictly decreasing sequence along
the composite trajectory: the construction behaves as a control Lyapunov
function, which is the computable face of the stability argument.
"""

import math

import freehorizon as fh


def main():
    dt, M = 0.1, 0.5
    model = fh.make_model("pendulum")
    cost = fh.default_cost("pendulum")
    ric = fh.solve_dare(fh.linearize_discrete(model, dt), cost)

    report = fh.clf_decrease_check(model, cost, ric, [5 * math.pi / 12, 0.0],
                                   M, 40, stride=5, dt=dt)
    print("  t    value")
    for t, v in zip(report.times, report.values):
        marker = "outside" if v > M else "inside"
        print(f"{t:4d} {v:12.6g}   ({marker} the level set)")
    print(f"\nstrictly decreasing: {report.strictly_decreasing} "
          f"(tolerance {report.tolerance}, complete: {report.complete})")


if __name__ == "__main__":
    main()
