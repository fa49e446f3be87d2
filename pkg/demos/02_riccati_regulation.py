"""Stationary Riccati solution and the limits of pure LQR regulation.

The gain stabilizes a neighborhood of the goal, and the level sets of
x'P x give the natural yardstick for "how far out" the linear law can be
trusted: from the hanging cart-pole state, pure LQR diverges.
"""

import numpy as np

import freehorizon as fh


def main():
    dt = 0.1
    for name in ("pendulum", "cartpole"):
        model = fh.make_model(name)
        cost = fh.default_cost(name)
        lin = fh.linearize_discrete(model, dt)
        ric = fh.solve_dare(lin, cost)
        closed = max(abs(np.linalg.eigvals(lin.A - lin.B @ ric.K)))
        print(f"== {name} ==")
        print(f"   DARE converged in {ric.iterations} iterations, "
              f"residual {ric.residual:.2e}")
        print(f"   closed-loop spectral radius: {closed:.3f}")

        # regulation from a small perturbation works
        x0 = fh.from_error_coords(model, 0.05 * np.ones(model.n) / np.sqrt(model.n))
        traj = fh.lqr_rollout(model, ric.K, x0, 150, dt, cost)
        err = np.linalg.norm(fh.error_coords(model, traj.states[-1]))
        print(f"   from a 0.05-ball state: final error {err:.2e}, "
              f"cost {traj.total_cost:.4f}")

        # ... but not from the hanging state
        traj = fh.lqr_rollout(model, ric.K, np.zeros(model.n), 150, dt, cost)
        if traj.diverged:
            print("   from hanging: DIVERGED (outside the region of attraction)")
        else:
            err = np.linalg.norm(fh.error_coords(model, traj.states[-1]))
            print(f"   from hanging: error {err:.1e}, cost {traj.total_cost:.1f} "
                  "(stabilized, but far above the optimized transfer)")

        level = fh.select_level(model, cost, ric, dt=dt)
        print(f"   largest empirically safe level set: M = {level}")
        print()


if __name__ == "__main__":
    main()
