"""Initial guesses for the per-step Newton solve.

Predicted mode extrapolates each unknown from history: differential
states with the two-step second-derivative method, algebraic states with
three-step Adams-Bashforth, and algebraic derivatives by differentiating
the predicted algebraic value with BDF3. Naive mode reuses the previous
solution.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .coeffgen import Family, IntegratorSpec, closed_form
from .dae_core import StepClass
from .errors import ConfigInvalid
from .history import StateHistory
from .stepper import CoefficientBlock


class GuessMode(str, Enum):
    NAIVE = "naive"
    PREDICTED = "predicted"


class CoefficientBank:
    """Memoized coefficient generation with a generation counter.

    After :meth:`freeze`, requesting a triple not generated before raises,
    which guarantees no coefficient work happens inside a time loop.
    """

    def __init__(self):
        self._specs = {}
        self.generations = 0
        self.frozen = False

    def get(self, family, omega, h) -> IntegratorSpec:
        family = Family.parse(family)
        key = (family, float(omega), float(h))
        spec = self._specs.get(key)
        if spec is None:
            if self.frozen:
                raise RuntimeError(f"coefficient generation after freeze: {key}")
            variant = "modified" if omega > 0 else "classical"
            spec = closed_form(family, variant, omega, h)
            self._specs[key] = spec
            self.generations += 1
        return spec

    def freeze(self):
        self.frozen = True

    def __len__(self):
        return len(self._specs)


@dataclass
class PredictionPolicy:
    """Guess mode and per-state selected angular frequency (rad/s).

    ``omega_select`` has one entry per state ``[x..., y...]``; the algebraic
    derivative unknowns share the entry of their algebraic state. Zero
    selects the classical variant.
    """

    mode: GuessMode = GuessMode.PREDICTED
    omega_select: Sequence[float] = ()
    diff_family: Family = Family.GEN_AB2
    alg_family: Family = Family.AB3
    deriv_family: Family = Family.BDF3

    def __post_init__(self):
        self.mode = GuessMode(self.mode)
        if any(w < 0 for w in self.omega_select):
            raise ConfigInvalid("omega_select entries must be >= 0")

    def assignments(self, n_diff, n_alg):
        """(family, omega) per unknown of the assembled vector."""
        w = list(self.omega_select)
        if len(w) != n_diff + n_alg:
            raise ConfigInvalid(f"omega_select needs {n_diff + n_alg} entries, got {len(w)}")
        return ([(self.diff_family, w[i]) for i in range(n_diff)]
                + [(self.alg_family, w[n_diff + i]) for i in range(n_alg)]
                + [(self.deriv_family, w[n_diff + i]) for i in range(n_alg)])

    def bind(self, bank: CoefficientBank, h, n_diff, n_alg) -> "Predictor":
        return Predictor(self, bank, h, n_diff, n_alg)


@dataclass
class Predictor:
    policy: PredictionPolicy
    bank: CoefficientBank
    h: float
    n_diff: int
    n_alg: int
    blocks: dict = field(init=False)

    def __post_init__(self):
        assign = self.policy.assignments(self.n_diff, self.n_alg)
        nd, na = self.n_diff, self.n_alg
        self.blocks = {}
        for role, lo, hi in (("diff", 0, nd), ("alg", nd, nd + na), ("deriv", nd + na, nd + 2 * na)):
            if hi > lo:
                specs = [self.bank.get(f, w, self.h) for f, w in assign[lo:hi]]
                self.blocks[role] = CoefficientBlock.from_specs(specs)
        empty = np.zeros((4, 0))
        self.gen = self.blocks["diff"].matrix if nd else empty
        self.ab = self.blocks["alg"].matrix if na else empty
        self.bdf = self.blocks["deriv"].matrix if na else empty
        self.depth = max(blk.steps for blk in self.blocks.values())

    @property
    def mode(self):
        return self.policy.mode


def eligible(now: StepClass, prev1: Optional[StepClass], prev2: Optional[StepClass]) -> bool:
    """Prediction is used only when this step and the two before it are normal."""
    return now is StepClass.NORMAL and prev1 is StepClass.NORMAL and prev2 is StepClass.NORMAL


def naive(hist: StateHistory, n_diff: int, n_alg: int) -> np.ndarray:
    """Previous solution vector ``[x, y, ydot]``."""
    slot = hist._slot(0)
    ns = n_diff + n_alg
    out = np.empty(n_diff + 2 * n_alg)
    out[:ns] = hist.values[slot]
    out[ns:] = hist.d1[slot, n_diff:]
    return out


def predict(hist: StateHistory, pred: Predictor) -> np.ndarray:
    """Extrapolated guess; raises InsufficientHistory when the window is unusable."""
    nd, na = pred.n_diff, pred.n_alg
    slots = hist.window(pred.depth, pred.h)
    return kernels.predict_all(pred.gen, pred.ab, pred.bdf, hist.values, hist.d1, hist.d2,
                               slots, nd, na)
