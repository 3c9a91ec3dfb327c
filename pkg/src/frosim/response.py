"""s-domain relative error of an integrator and root verification."""
from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from . import kernels
from ._accel import NUMBA_ENABLED
from .coeffgen import IntegratorSpec, RootSpec, basis_derivative


class SweepRow(NamedTuple):
    frequency: float
    magnitude: float
    phase: float


class RootCheck(NamedTuple):
    location: complex
    claimed: int
    observed: int
    passed: bool
    derivatives: tuple      # |d^k E / dz^k| for k = 0..claimed


def _arrays(spec: IntegratorSpec):
    tpl = spec.template
    k = spec.dimensionless()
    p = np.array([b[0] for b in tpl.basis], dtype=np.int64)
    q = np.array([b[1] for b in tpl.basis], dtype=float)
    gw = np.array([t[0] for t in tpl.forcing], dtype=float)
    gp = np.array([t[1] for t in tpl.forcing], dtype=np.int64)
    gq = np.array([t[2] for t in tpl.forcing], dtype=float)
    return k, p, q, gw, gp, gq


def relative_error(spec: IntegratorSpec, s):
    """Relative error E(s h) of ``spec``; scalar or array ``s`` in 1/s."""
    scalar = np.ndim(s) == 0
    z = np.atleast_1d(np.asarray(s, dtype=complex)) * spec.h
    args = _arrays(spec)
    if NUMBA_ENABLED:
        out = kernels.error_expression(z.ravel(), *args).reshape(z.shape)
    else:
        out = kernels.error_expression_numpy(z.ravel(), *args).reshape(z.shape)
    return complex(out[0]) if scalar else out


def error_derivative(spec: IntegratorSpec, s, order: int) -> complex:
    """d^order E / dz^order at s, i.e. the s-derivative divided by h**order."""
    tpl = spec.template
    z = complex(s) * spec.h
    if z == 0:
        z = 0
    val = sum(w * basis_derivative(p, q, order, z) for w, p, q in tpl.forcing)
    for kj, (p, q) in zip(spec.dimensionless(), tpl.basis):
        val -= kj * basis_derivative(p, q, order, z)
    return complex(val)


def verify_roots(spec: IntegratorSpec, claimed: RootSpec, tol: float = 1e-8) -> list:
    """Check each claimed root has exactly the claimed multiplicity.

    Derivatives are taken in z = s*h and normalized by the largest
    dimensionless coefficient magnitude (at least 1).
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    norm = max(1.0, float(np.max(np.abs(spec.dimensionless()))))
    report = []
    for loc, mult in claimed.roots:
        mags = [abs(error_derivative(spec, loc, k)) / norm for k in range(mult + 1)]
        observed = next((k for k, v in enumerate(mags) if v >= tol), None)
        if observed is None:
            observed = mult + 1
            for k in range(mult + 1, mult + 8):
                if abs(error_derivative(spec, loc, k)) / norm >= tol:
                    break
                observed = k + 1
        passed = all(v < tol for v in mags[:mult]) and mags[mult] >= tol
        report.append(RootCheck(complex(loc), mult, observed, passed, tuple(mags)))
    return report


def sweep(spec: IntegratorSpec, f_min: float, f_max: float, n_points: int, spacing="linear") -> list:
    """|E(j 2 pi f)| and its phase on a linear or logarithmic grid (Hz)."""
    if not 0 <= f_min < f_max:
        raise ValueError("need 0 <= f_min < f_max")
    if n_points < 2:
        raise ValueError("need at least two points")
    if spacing == "log":
        if f_min <= 0:
            raise ValueError("log spacing needs f_min > 0")
        f = np.geomspace(f_min, f_max, n_points)
    elif spacing == "linear":
        f = np.linspace(f_min, f_max, n_points)
    else:
        raise ValueError(f"unknown spacing {spacing!r}")
    e = relative_error(spec, 2j * math.pi * f)
    return [SweepRow(float(fi), float(abs(ei)), float(np.angle(ei))) for fi, ei in zip(f, e)]
