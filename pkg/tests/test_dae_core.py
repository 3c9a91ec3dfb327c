import math

import numpy as np
import pytest

from frosim.coeffgen import closed_form
from frosim.dae_core import (DaeSystem, Discretizer, GuessSource, HalfStepRule, NewtonConfig, StepClass,
                             StepRecord, anits, consistent_initial, schedule_steps, solve_step)
from frosim.errors import ConfigInvalid, EventOffGrid, NoConvergence, SingularJacobian
from frosim.history import StateHistory
from frosim.scenarios import ScalarLinear, SurrogateThreePhase


def scalar_setup(lam=-3.0, h=0.1, n_hist=2):
    dae = ScalarLinear(lam=lam)
    disc = Discretizer([closed_form("BDF2", "classical", h=h)])
    hist = StateHistory(1)
    for k in range(n_hist):
        t = k * h
        x = math.exp(lam * t)
        hist.push(t, [x], [lam * x])
    return dae, disc, hist, n_hist * h


@pytest.mark.parametrize("guess", [0.0, 1.0, -50.0, 1e3])
def test_linear_converges_in_one_iteration(guess):
    dae, disc, hist, t = scalar_setup()
    X, rec = solve_step(dae, disc, hist, t, [guess], NewtonConfig(1e-10))
    assert rec.iterations == 1 and rec.converged
    c, gamma, label = disc.coefficients(hist, t, 0.1, StepClass.NORMAL)
    assert label == "BDF2"
    assert X[0] == pytest.approx(c[0] / (1 - gamma[0] * -3.0), rel=1e-14)


def test_exact_guess_counts_one_iteration():
    dae, disc, hist, t = scalar_setup()
    X, _ = solve_step(dae, disc, hist, t, [0.0], NewtonConfig(1e-10))
    X2, rec = solve_step(dae, disc, hist, t, X, NewtonConfig(1e-10))
    assert rec.iterations == 1 and rec.guess_error == 0.0


def test_guess_shape_checked():
    dae, disc, hist, t = scalar_setup()
    with pytest.raises(ValueError):
        solve_step(dae, disc, hist, t, [0.0, 1.0], NewtonConfig())


def test_fallbacks():
    dae, disc, hist, t = scalar_setup(n_hist=1)
    c, gamma, label = disc.coefficients(hist, t - 0.0, 0.1, StepClass.NORMAL)
    assert label == "TRAP" and gamma[0] == pytest.approx(0.05)
    hist.mark_stale()
    assert disc.coefficients(hist, t, 0.1, StepClass.NORMAL)[2] == "BE"
    assert disc.coefficients(hist, t, 0.05, StepClass.HALF_FIRST)[2] == "BE"
    trap = Discretizer([closed_form("BDF2", "classical", h=0.1)], HalfStepRule.TRAPEZOID)
    assert trap.coefficients(hist, t, 0.05, StepClass.HALF_FIRST)[2] == "TRAP"


class Cubic(DaeSystem):
    """0 = y^3 + y - 10 with a dummy differential state."""
    n_diff, n_alg = 1, 1

    def model(self, t, x, y, yd, u, ud):
        return np.zeros(1), y**3 + y - 10, (3 * y**2 + 1) * yd

    def jacobian(self, t, x, y, yd, u, ud):
        J = np.zeros((3, 3))
        J[1, 1] = 3 * y[0] ** 2 + 1
        J[2, 1] = 6 * y[0] * yd[0]
        J[2, 2] = 3 * y[0] ** 2 + 1
        return J


def cubic_case():
    dae = Cubic()
    disc = Discretizer([closed_form("BDF2", "classical", h=1.0)])
    hist = StateHistory(2)
    for k in range(2):
        hist.push(float(k), [0.0, 0.0], [0.0, 0.0])
    return dae, disc, hist


def test_nonlinear_quadratic_convergence_and_monotonicity():
    dae, disc, hist = cubic_case()
    norms = []
    X = np.array([0.0, 5.0, 0.0])
    from frosim import kernels
    c, gamma, _ = disc.coefficients(hist, 2.0, 1.0, StepClass.NORMAL)
    for _ in range(12):
        f, g, gd, jac = dae.evaluate(2.0, X)
        res, J = kernels.assemble_step(X, c, gamma, f, g, gd, jac, 1.0, 1, 1)
        norms.append(kernels.inf_norm(res))
        X = X - np.linalg.solve(J, res)
    small = [i for i, r in enumerate(norms) if r < 1e-2 * 1e-8]
    for i in small[:-1]:
        assert norms[i + 1] <= norms[i] or norms[i + 1] < 1e-14
    Xs, rec = solve_step(dae, disc, hist, 2.0, [0.0, 5.0, 0.0], NewtonConfig(1e-12))
    assert Xs[1] == pytest.approx(2.0, rel=1e-14)
    assert 3 <= rec.iterations <= 8


def test_no_convergence_and_frozen_jacobian():
    dae, disc, hist = cubic_case()
    with pytest.raises(NoConvergence) as info:
        solve_step(dae, disc, hist, 2.0, [0.0, 5.0, 0.0], NewtonConfig(1e-12, max_iter=2))
    assert info.value.record.iterations == 2 and not info.value.record.converged
    every = solve_step(dae, disc, hist, 2.0, [0.0, 2.2, 0.0], NewtonConfig(1e-12))[1].iterations
    frozen = solve_step(dae, disc, hist, 2.0, [0.0, 2.2, 0.0],
                        NewtonConfig(1e-12, 50, "first_iteration"))[1].iterations
    assert frozen > every


class Singular(Cubic):
    def jacobian(self, t, x, y, yd, u, ud):
        return np.zeros((3, 3))


def test_singular_jacobian():
    _, disc, hist = cubic_case()
    with pytest.raises(SingularJacobian):
        solve_step(Singular(), disc, hist, 2.0, [0.0, 1.0, 0.0], NewtonConfig())


def test_newton_config_validation():
    for bad in [dict(tol_inf=0), dict(max_iter=0), dict(max_iter=1.5), dict(jacobian_refresh="sometimes")]:
        with pytest.raises((ConfigInvalid, ValueError)):
            NewtonConfig(**bad)


def test_consistent_initial_surrogate():
    dae = SurrogateThreePhase(alpha=0.05)
    X0 = dae.phasor_state()
    X = consistent_initial(dae, X0)
    f, g, gd, _ = dae.evaluate(0.0, X)
    assert np.abs(g).max() < 1e-12 and np.abs(gd).max() < 1e-9
    assert np.array_equal(X[:4], X0[:4])


# ---- scheduling ---------------------------------------------------------------

def test_schedule_no_events():
    steps = schedule_steps(10.0, 1.0)
    assert len(steps) == 10 and all(s.step_class is StepClass.NORMAL for s in steps)
    assert steps[-1].t == 10.0


def test_schedule_event():
    h = 1e-3
    steps = schedule_steps(10 * h, h, [5 * h])
    classes = [s.step_class for s in steps]
    i = classes.index(StepClass.HALF_FIRST)
    assert steps[i].t == pytest.approx(5.5 * h) and steps[i].event == 0
    assert steps[i + 1].step_class is StepClass.HALF_SECOND and steps[i + 1].t == pytest.approx(6 * h)
    assert steps[i + 2].step_class is StepClass.NORMAL
    assert classes.count(StepClass.HALF_FIRST) == 1 and len(steps) == 11
    assert sum(s.h_step for s in steps) == pytest.approx(10 * h, abs=1e-15)
    assert steps[-1].t == 10 * h


def test_schedule_exact_end_time_on_awkward_grid():
    steps = schedule_steps(5.0, 2.5e-4, [0.1, 0.3])
    assert steps[-1].t == 5.0
    assert len(steps) == 20002


@pytest.mark.parametrize("events,err", [([0.00015], EventOffGrid), ([3e-4, 3e-4], ConfigInvalid),
                                        ([4e-4, 1e-4], ConfigInvalid), ([1e-3], ConfigInvalid)])
def test_schedule_rejects(events, err):
    with pytest.raises(err):
        schedule_steps(1e-3, 1e-4, events)


def test_schedule_rejects_off_grid_end():
    with pytest.raises(EventOffGrid):
        schedule_steps(1.00005, 1e-3)


def test_back_to_back_events_allowed():
    steps = schedule_steps(4.0, 1.0, [1.0, 2.0])
    assert [s.step_class.value for s in steps] == ["Normal", "HalfFirst", "HalfSecond", "HalfFirst",
                                                  "HalfSecond", "Normal"]


def test_anits():
    rec = lambda n: StepRecord(0.0, StepClass.NORMAL, n, True, GuessSource.NAIVE)
    assert anits([rec(2)] * 5) == 2.0
    assert anits([rec(1), rec(2), rec(3)]) == 2.0
    assert anits([rec(1), rec(2)]) == 1.5
    with pytest.raises(ValueError):
        anits([])
