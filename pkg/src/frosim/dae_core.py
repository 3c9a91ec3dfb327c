"""Simultaneous Newton solution of a semi-explicit DAE, one step at a time.

Unknown layout per step: ``X = [x (n_diff), y (n_alg), ydot (n_alg)]``.
Residual rows:

* differential   ``x - c - gamma * f(t, x, y, u)``, where ``(c, gamma)``
  come from the discretization of each differential state;
* algebraic      ``g(t, x, y, u)``;
* derivative     ``der_scale * d/dt g``, which pins the algebraic
  derivative unknowns needed by second-derivative predictors.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple, Optional, Sequence

import numpy as np

from . import kernels
from .coeffgen import Family, IntegratorSpec
from .errors import (ConfigInvalid, EventOffGrid, InsufficientHistory, NoConvergence,
                     SingularJacobian, StepMismatch)
from .history import StateHistory
from .stepper import CoefficientBlock, second_derivative


class StepClass(str, Enum):
    NORMAL = "Normal"
    HALF_FIRST = "HalfFirst"
    HALF_SECOND = "HalfSecond"


class GuessSource(str, Enum):
    PREDICTED = "Predicted"
    NAIVE = "Naive"


class JacobianRefresh(str, Enum):
    EVERY_ITERATION = "every_iteration"
    FIRST_ITERATION = "first_iteration"


class HalfStepRule(str, Enum):
    BACKWARD_EULER = "backward_euler"
    TRAPEZOID = "trapezoid"


@dataclass(frozen=True)
class NewtonConfig:
    tol_inf: float = 1e-8
    max_iter: int = 20
    jacobian_refresh: JacobianRefresh = JacobianRefresh.EVERY_ITERATION

    def __post_init__(self):
        if not self.tol_inf > 0:
            raise ConfigInvalid("tol_inf must be positive")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise ConfigInvalid("max_iter must be an integer >= 1")
        object.__setattr__(self, "jacobian_refresh", JacobianRefresh(self.jacobian_refresh))


@dataclass
class StepRecord:
    t: float
    step_class: StepClass
    iterations: int
    converged: bool
    guess_source: GuessSource
    guess_residual: float = math.nan    # ||F(guess)||_inf
    guess_error: float = math.nan       # ||guess - solution||_inf
    residual: float = math.nan          # ||F(solution)||_inf
    method: str = ""                    # discretization used for differential states


class DaeSystem:
    """Semi-explicit DAE  xdot = f(t, x, y, u),  0 = g(t, x, y, u).

    Subclasses implement :meth:`model` and :meth:`jacobian`; they may
    override :meth:`evaluate` with a fused kernel.
    """

    n_diff: int = 0
    n_alg: int = 0
    names: tuple = ()
    der_scale: float = 1.0

    @property
    def n_unknowns(self):
        return self.n_diff + 2 * self.n_alg

    @property
    def n_states(self):
        return self.n_diff + self.n_alg

    def inputs(self, t) -> np.ndarray:
        return np.zeros(0)

    def input_rates(self, t) -> Optional[np.ndarray]:
        return np.zeros(0)

    def model(self, t, x, y, ydot, u, udot):
        """Return ``(f, g, dg/dt)``."""
        raise NotImplementedError

    def jacobian(self, t, x, y, ydot, u, udot) -> np.ndarray:
        """Partials of ``[f; g; dg/dt]`` with respect to ``[x, y, ydot]``."""
        raise NotImplementedError

    def partial_t(self, t, x, y, u) -> np.ndarray:
        return np.zeros(self.n_diff)

    def partial_u(self, t, x, y, u) -> Optional[np.ndarray]:
        return None

    def split(self, X):
        nd, na = self.n_diff, self.n_alg
        return X[:nd], X[nd:nd + na], X[nd + na:]

    def evaluate(self, t, X):
        x, y, yd = self.split(X)
        u, ud = self.inputs(t), self.input_rates(t)
        if ud is None:
            ud = np.zeros_like(u)
        f, g, gd = self.model(t, x, y, yd, u, ud)
        jac = self.jacobian(t, x, y, yd, u, ud)
        return (np.asarray(f, float), np.asarray(g, float), np.asarray(gd, float),
                np.ascontiguousarray(jac, dtype=float))

    def state_derivatives(self, t, X, second=True):
        """``(xdot, xddot)`` at a solution point; ``xddot`` is None unless asked."""
        x, y, yd = self.split(X)
        u, ud = self.inputs(t), self.input_rates(t)
        f = np.asarray(self.model(t, x, y, yd, u, ud if ud is not None else np.zeros_like(u))[0], float)
        return f, (second_derivative(self, t, x, y, f, yd) if second else None)

    def apply_event(self, action: str, parameter=None):
        raise ConfigInvalid(f"{type(self).__name__} has no event {action!r}")

    def initial_state(self) -> np.ndarray:
        raise NotImplementedError

    def prehistory(self, h, count):
        """Exact samples before t = 0 as ``(t, values, d1, d2)``, oldest first, or None."""
        return None


# ---------------------------------------------------------------------------
# discretization of differential states
# ---------------------------------------------------------------------------

_IMPLICIT = (Family.BDF2, Family.BDF3)


class Discretizer:
    """Maps history to ``(c, gamma)`` with ``x_t = c + gamma * f_t`` per differential state.

    Normal steps use each variable's integrator. When its history window is
    missing, stale or unevenly spaced, the step falls back to the trapezoidal
    rule from the last entry (or backward Euler if that entry is stale).
    Half steps use ``half_rule``.
    """

    def __init__(self, specs: Sequence[IntegratorSpec], half_rule=HalfStepRule.BACKWARD_EULER):
        specs = list(specs)
        if not specs:
            self.h = None
            self.groups = []
        else:
            self.h = specs[0].h
            by_family = {}
            for j, s in enumerate(specs):
                by_family.setdefault(s.family, []).append(j)
            self.groups = [(fam, np.array(cols), CoefficientBlock.from_specs([specs[j] for j in cols]))
                           for fam, cols in by_family.items()]
        self.n = len(specs)
        self.half_rule = HalfStepRule(half_rule)
        self.needs_second = any(fam is Family.GEN_AB2 for fam, _, _ in self.groups)

    def coefficients(self, hist: StateHistory, t, h_step, step_class):
        n = self.n
        c = np.empty(n)
        gamma = np.empty(n)
        if n == 0:
            return c, gamma, "-"
        slot = hist._slot(0)
        x_prev = hist.values[slot, :n]
        if step_class is not StepClass.NORMAL:
            if self.half_rule is HalfStepRule.TRAPEZOID:
                c[:] = x_prev + 0.5 * h_step * hist.d1[slot, :n]
                gamma[:] = 0.5 * h_step
                return c, gamma, "TRAP"
            c[:] = x_prev
            gamma[:] = h_step
            return c, gamma, "BE"
        labels = []
        for fam, cols, blk in self.groups:
            try:
                steps = blk.steps
                slots = hist.window(steps, self.h)
                if fam in _IMPLICIT:
                    past = np.ascontiguousarray(hist.values[slots][:, cols])
                    c[cols] = kernels.bdf_history_sum(blk.matrix, past)
                    gamma[cols] = blk.matrix[-1]
                elif fam is Family.GEN_AB2:
                    c[cols] = kernels.gen2_step(blk.matrix, hist.values[slots[0], cols],
                                                np.ascontiguousarray(hist.d1[slots][:, cols]),
                                                np.ascontiguousarray(hist.d2[slots][:, cols]))
                    gamma[cols] = 0.0
                else:
                    c[cols] = kernels.ab_step(blk.matrix, hist.values[slots[0], cols],
                                              np.ascontiguousarray(hist.d1[slots][:, cols]))
                    gamma[cols] = 0.0
                labels.append(fam.value)
            except (InsufficientHistory, StepMismatch):
                fresh = not hist.stale[slot] and abs(t - h_step - hist.times[slot]) <= 1e-9 * h_step
                if fresh:
                    c[cols] = x_prev[cols] + 0.5 * h_step * hist.d1[slot, cols]
                    gamma[cols] = 0.5 * h_step
                    labels.append("TRAP")
                else:
                    c[cols] = x_prev[cols]
                    gamma[cols] = h_step
                    labels.append("BE")
        return c, gamma, "+".join(labels)


# ---------------------------------------------------------------------------
# Newton step
# ---------------------------------------------------------------------------

def solve_step(dae: DaeSystem, disc: Discretizer, hist: StateHistory, t: float, guess,
               cfg: NewtonConfig, step_class=StepClass.NORMAL, h_step=None,
               guess_source=GuessSource.NAIVE):
    """Solve one step by Newton from ``guess``; returns ``(X, StepRecord)``.

    One iteration is one linear solve plus update, followed by a residual
    check; the count is therefore at least 1 even for an exact guess.
    """
    if h_step is None:
        h_step = disc.h if step_class is StepClass.NORMAL else 0.5 * disc.h
    nd, na = dae.n_diff, dae.n_alg
    c, gamma, label = disc.coefficients(hist, t, h_step, step_class)
    X = np.array(guess, dtype=float)
    if X.shape != (dae.n_unknowns,):
        raise ValueError(f"guess has shape {X.shape}, expected ({dae.n_unknowns},)")
    f, g, gd, jac = dae.evaluate(t, X)
    res, J = kernels.assemble_step(X, c, gamma, f, g, gd, jac, dae.der_scale, nd, na)
    r0 = kernels.inf_norm(res)
    refresh = cfg.jacobian_refresh is JacobianRefresh.EVERY_ITERATION
    J_use = J
    it = 0
    while True:
        dx, ok = kernels.solve_dense(J_use, res)
        if not ok:
            raise SingularJacobian(f"singular Newton matrix at t={t}")
        X -= dx
        it += 1
        f, g, gd, jac = dae.evaluate(t, X)
        res, J = kernels.assemble_step(X, c, gamma, f, g, gd, jac, dae.der_scale, nd, na)
        r = kernels.inf_norm(res)
        if r < cfg.tol_inf:
            break
        if it >= cfg.max_iter:
            rec = StepRecord(t, step_class, it, False, guess_source, r0, math.nan, r, label)
            raise NoConvergence(f"Newton did not converge at t={t} (|F|={r:.3e})", record=rec)
        if refresh:
            J_use = J
    err = kernels.inf_norm(X - np.asarray(guess, float))
    return X, StepRecord(t, step_class, it, True, guess_source, r0, err, r, label)


# ---------------------------------------------------------------------------
# scheduling
# ---------------------------------------------------------------------------

class ScheduledStep(NamedTuple):
    t: float
    step_class: StepClass
    h_step: float
    event: Optional[int]     # index of the event applied before this step


def _grid_index(t, h, what):
    n = round(t / h)
    tol = max(1e-12 * h, 4 * math.ulp(max(abs(t), h)))
    if abs(n * h - t) > tol:
        raise EventOffGrid(f"{what} {t!r} is not a multiple of h={h!r}")
    return int(n)


def schedule_steps(t_end: float, h: float, events: Sequence[float] = ()) -> list:
    """Step list on the grid ``t_end * m / (2N)``, ``N = t_end / h``.

    Each event at ``k h`` is followed by two half steps ending at
    ``k h + h/2`` and ``(k + 1) h``. Times are generated from integers so the
    last step lands on ``t_end`` exactly.
    """
    if not (t_end > 0 and h > 0):
        raise ConfigInvalid("t_end and h must be positive")
    N = _grid_index(t_end, h, "t_end")
    if N < 1:
        raise ConfigInvalid("t_end shorter than one step")
    ks = [_grid_index(e, h, "event time") for e in events]
    if any(b < a for a, b in zip(ks, ks[1:])):
        raise ConfigInvalid("events must be sorted")
    if len(set(ks)) != len(ks):
        raise ConfigInvalid("two events fall inside one half-step window")
    if ks and (ks[0] < 0 or ks[-1] >= N):
        raise ConfigInvalid("events must lie in [0, t_end - h]")
    at = {k: i for i, k in enumerate(ks)}

    def time(m):
        return t_end * m / (2 * N)

    out = []
    for k in range(N):
        if k in at:
            out.append(ScheduledStep(time(2 * k + 1), StepClass.HALF_FIRST, 0.5 * h, at[k]))
            out.append(ScheduledStep(time(2 * k + 2), StepClass.HALF_SECOND, 0.5 * h, None))
        else:
            out.append(ScheduledStep(time(2 * k + 2), StepClass.NORMAL, h, None))
    return out


def anits(records: Sequence[StepRecord]) -> float:
    """Average Newton iterations per time step (full precision)."""
    if not records:
        raise ValueError("no step records")
    return sum(r.iterations for r in records) / len(records)


def consistent_initial(dae: DaeSystem, X0, t=0.0, cfg: NewtonConfig = NewtonConfig(tol_inf=1e-13)):
    """Hold the differential states of ``X0`` and solve for ``y`` and ``ydot``."""
    nd, na = dae.n_diff, dae.n_alg
    X = np.array(X0, dtype=float)
    if na == 0:
        return X
    c = X[:nd].copy()
    gamma = np.zeros(nd)
    for _ in range(cfg.max_iter):
        f, g, gd, jac = dae.evaluate(t, X)
        res, J = kernels.assemble_step(X, c, gamma, f, g, gd, jac, dae.der_scale, nd, na)
        if kernels.inf_norm(res) < cfg.tol_inf:
            return X
        dx, ok = kernels.solve_dense(J, res)
        if not ok:
            raise SingularJacobian("singular initialization system")
        X -= dx
    raise NoConvergence("initial algebraic states did not converge")
