import numpy as np
import pytest

from freehorizon import QuadraticCost, TerminalCost, default_cost, incremental_cost, terminal_cost_eval


def test_zero_at_origin():
    c = QuadraticCost(Q=np.eye(2), R=np.eye(1))
    assert incremental_cost(c, [0.0, 0.0], [0.0]) == 0.0


def test_hand_computed_value():
    c = QuadraticCost(Q=np.eye(2), R=np.array([[1.0]]))
    assert incremental_cost(c, [1.0, 2.0], [3.0]) == pytest.approx(14.0)


def test_quadratic_symmetry():
    c = default_cost("cartpole")
    rng = np.random.default_rng(5)
    for _ in range(20):
        xe = rng.normal(0, 2, 4)
        u = rng.normal(0, 2, 1)
        assert incremental_cost(c, xe, u) == pytest.approx(incremental_cost(c, -xe, -u))


def test_gradient_vanishes_at_origin():
    c = default_cost("pendulum")
    eps = 1e-6
    for i in range(2):
        d = np.zeros(2)
        d[i] = eps
        g = (incremental_cost(c, d, [0.0]) - incremental_cost(c, -d, [0.0])) / (2 * eps)
        assert abs(g) < 1e-9
    gu = (incremental_cost(c, [0, 0], [eps]) - incremental_cost(c, [0, 0], [-eps])) / (2 * eps)
    assert abs(gu) < 1e-9


def test_validation_rejects_bad_weights():
    with pytest.raises(ValueError):
        QuadraticCost(Q=np.array([[1.0, 2.0], [0.0, 1.0]]), R=np.eye(1))  # asymmetric
    with pytest.raises(ValueError):
        QuadraticCost(Q=np.eye(2), R=np.zeros((1, 1)))  # R not PD
    with pytest.raises(ValueError):
        QuadraticCost(Q=-np.eye(2), R=np.eye(1))  # Q not PSD


def test_terminal_kinds():
    P = np.diag([2.0, 1.0])
    assert terminal_cost_eval(TerminalCost.none(), [3.0, 4.0]) == 0.0
    assert terminal_cost_eval(TerminalCost.riccati(P), [0.0, 0.0]) == 0.0
    assert terminal_cost_eval(TerminalCost.riccati(P), [1.0, 1.0]) == pytest.approx(3.0)
    floored = TerminalCost.riccati_floored(P, 5.0)
    assert terminal_cost_eval(floored, [1.0, 1.0]) == pytest.approx(5.0)  # floor active
    assert terminal_cost_eval(floored, [2.0, 1.0]) == pytest.approx(9.0)  # floor inactive


def test_floored_dominates_riccati_pointwise():
    P = np.array([[3.0, 0.5], [0.5, 1.0]])
    tc_r = TerminalCost.riccati(P)
    tc_f = TerminalCost.riccati_floored(P, 2.0)
    rng = np.random.default_rng(9)
    for _ in range(50):
        xe = rng.normal(0, 1.5, 2)
        r = terminal_cost_eval(tc_r, xe)
        f = terminal_cost_eval(tc_f, xe)
        assert f >= r
        if r >= 2.0:
            assert f == pytest.approx(r)
        else:
            assert f == pytest.approx(2.0)


def test_terminal_validation():
    with pytest.raises(ValueError):
        TerminalCost(kind="riccati")  # missing P
    with pytest.raises(ValueError):
        TerminalCost(kind="huber")
    with pytest.raises(ValueError):
        TerminalCost.riccati_floored(np.eye(2), -1.0)
