"""Bundled plants, RK4 stepping, and linearization at the goal.

Shows that both benchmark goals are open-loop unstable equilibria whose
linearizations are controllable, which is everything the terminal-set
construction needs from the plant.
"""

import numpy as np

import freehorizon as fh


def controllability_rank(lin):
    blocks = [lin.B]
    for _ in range(lin.A.shape[0] - 1):
        blocks.append(lin.A @ blocks[-1])
    return np.linalg.matrix_rank(np.hstack(blocks))


def main():
    dt = 0.1
    for name in ("pendulum", "cartpole"):
        model = fh.make_model(name)
        print(f"== {name} (n={model.n}, p={model.p}) ==")
        print("   goal state:", model.x_goal)

        # the goal is a fixed point of the integrator
        step = fh.rk4_step(model, model.x_goal, np.zeros(model.p), dt)
        print("   |rk4(goal) - goal| =", np.max(np.abs(step - model.x_goal)))

        lin = fh.linearize_discrete(model, dt)
        sr = max(abs(np.linalg.eigvals(lin.A)))
        print(f"   open-loop spectral radius: {sr:.3f} (unstable)")
        print(f"   controllability rank: {controllability_rank(lin)} of {model.n}")

        # error coordinates wrap the angle entries onto the circle
        hanging = np.zeros(model.n)
        print("   error coords of hanging state:", fh.error_coords(model, hanging))
        print()


if __name__ == "__main__":
    main()
