"""Discretization templates applied to a state history.

All kernels are vectorized over variables: ``spec`` may be one
:class:`IntegratorSpec` (used for every selected column), a sequence with
one spec per column, or a prebuilt :class:`CoefficientBlock`.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .coeffgen import Family, IntegratorSpec
from .errors import MissingInputDerivative, StepMismatch
from .history import StateHistory


@dataclass(frozen=True)
class CoefficientBlock:
    family: Family
    h: float
    matrix: np.ndarray      # (n_coeffs, n_vars)

    @classmethod
    def from_specs(cls, specs):
        specs = list(specs)
        if not specs:
            raise ValueError("empty spec list")
        fam, h = specs[0].family, specs[0].h
        for s in specs[1:]:
            if s.family is not fam:
                raise ValueError("one block cannot mix integrator families")
            if abs(s.h - h) > 1e-12 * h:
                raise StepMismatch("one block cannot mix step sizes")
        mat = np.ascontiguousarray(np.array([s.coeffs for s in specs], dtype=float).T)
        return cls(fam, h, mat)

    @property
    def steps(self):
        return {Family.GEN_AB2: 2, Family.AB2: 2, Family.AB3: 3, Family.BDF2: 2, Family.BDF3: 3}[self.family]


def _block(spec, n) -> CoefficientBlock:
    if isinstance(spec, CoefficientBlock):
        return spec
    if isinstance(spec, IntegratorSpec):
        return CoefficientBlock.from_specs([spec] * n)
    return CoefficientBlock.from_specs(spec)


def _ncols(hist, cols):
    return hist.n_vars if cols is None else len(np.arange(hist.n_vars)[cols])


def _check(block, *families):
    if block.family not in families:
        raise ValueError(f"{block.family.value} is not one of {[f.value for f in families]}")


def step_explicit_gen2(spec, hist: StateHistory, cols=None) -> np.ndarray:
    """x_t = x_{t-h} + b-1 xd_{t-h} + b-2 xd_{t-2h} + c-1 xdd_{t-h} + c-2 xdd_{t-2h}."""
    blk = _block(spec, _ncols(hist, cols))
    _check(blk, Family.GEN_AB2)
    slots = hist.window(2, blk.h)
    sel = slice(None) if cols is None else cols
    return kernels.gen2_step(
        blk.matrix,
        np.ascontiguousarray(hist.values[slots[0]][sel]),
        np.ascontiguousarray(hist.d1[slots][:, sel]),
        np.ascontiguousarray(hist.d2[slots][:, sel]),
    )


def step_explicit_ab(spec, hist: StateHistory, cols=None) -> np.ndarray:
    """x_t = a-1 x_{t-h} + sum_i b-i xd_{t-ih}."""
    blk = _block(spec, _ncols(hist, cols))
    _check(blk, Family.AB2, Family.AB3)
    slots = hist.window(blk.steps, blk.h)
    sel = slice(None) if cols is None else cols
    return kernels.ab_step(
        blk.matrix,
        np.ascontiguousarray(hist.values[slots[0]][sel]),
        np.ascontiguousarray(hist.d1[slots][:, sel]),
    )


def bdf_history(spec, hist: StateHistory, cols=None):
    """``(sum_i a-i x_{t-ih}, b0)`` for the BDF relation x_t = sum + b0 xd_t."""
    blk = _block(spec, _ncols(hist, cols))
    _check(blk, Family.BDF2, Family.BDF3)
    past = hist.get("values", blk.steps, blk.h, cols)
    return kernels.bdf_history_sum(blk.matrix, np.ascontiguousarray(past)), blk.matrix[-1]


def bdf_residual_form(spec, hist: StateHistory, x_now, xdot_now, cols=None) -> np.ndarray:
    """x_now - sum_i a-i x_{t-ih} - b0 xdot_now (zero when the relation holds)."""
    blk = _block(spec, _ncols(hist, cols))
    _check(blk, Family.BDF2, Family.BDF3)
    past = np.ascontiguousarray(hist.get("values", blk.steps, blk.h, cols))
    return kernels.bdf_residual(blk.matrix, past, np.atleast_1d(np.asarray(x_now, float)),
                                np.atleast_1d(np.asarray(xdot_now, float)))


def differentiate_bdf(spec, hist: StateHistory, x_now, cols=None) -> np.ndarray:
    """Current derivative from the BDF relation solved for xd_t."""
    blk = _block(spec, _ncols(hist, cols))
    _check(blk, Family.BDF2, Family.BDF3)
    past = np.ascontiguousarray(hist.get("values", blk.steps, blk.h, cols))
    return kernels.bdf_differentiate(blk.matrix, past, np.atleast_1d(np.asarray(x_now, float)))


def second_derivative(dae, t, x, y, xdot, ydot) -> np.ndarray:
    """Chain rule xdd = df/dt + df/dx xd + df/dy yd + df/du ud.

    Algebraic states ``y`` enter ``f`` as inputs, so their derivatives
    ``ydot`` play the role of input rates alongside the external ``udot``.
    """
    nd, na = dae.n_diff, dae.n_alg
    u = dae.inputs(t)
    udot = dae.input_rates(t)
    jac = dae.jacobian(t, x, y, ydot, u, udot if udot is not None else np.zeros_like(u))
    out = dae.partial_t(t, x, y, u) + jac[:nd, :nd] @ xdot
    if na:
        out = out + jac[:nd, nd:nd + na] @ ydot
    fu = dae.partial_u(t, x, y, u)
    if fu is not None and fu.size and np.any(fu != 0):
        if udot is None:
            raise MissingInputDerivative("scenario supplies no input derivative")
        out = out + fu @ udot
    return out
