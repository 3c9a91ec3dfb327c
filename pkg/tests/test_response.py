import math
import os
import subprocess
import sys

import mpmath as mp
import numpy as np
import pytest

import oracles
from frosim.coeffgen import RootSpec, catalog, closed_form
from frosim.response import error_derivative, relative_error, sweep, verify_roots

# |E(j pi/2)| of classical AB2, 50-digit oracle
AB2_CLASSICAL_QUARTER = 1.3730686230124343


def test_golden_ab2_magnitude():
    spec = closed_form("AB2", "classical", h=1.0)
    assert abs(relative_error(spec, 1j * math.pi / 2)) == pytest.approx(AB2_CLASSICAL_QUARTER, rel=1e-15)
    ref = oracles.error("AB2", [1, mp.mpf(3) / 2, -mp.mpf(1) / 2], mp.mpc(0, mp.pi / 2))
    assert float(abs(ref)) == pytest.approx(AB2_CLASSICAL_QUARTER, rel=1e-15)


def test_modified_ab2_quarter_rate():
    spec = closed_form("AB2", "modified", math.pi / 2, 1.0)
    assert spec.coeffs == pytest.approx((1.0, 2 / math.pi, -2 / math.pi), rel=1e-14)
    assert abs(relative_error(spec, 1j * math.pi / 2)) < 1e-15


@pytest.mark.parametrize("entry", catalog(), ids=lambda e: f"{e.variant.value}-{e.family.value}")
def test_error_matches_oracle(entry):
    h = 1e-3
    spec = entry.spec(300.0, h)
    s = np.array([0.0, 50j, 700j, 2000j, 1500 + 300j])
    got = relative_error(spec, s)
    k = [float(v) for v in spec.dimensionless()]
    for si, gi in zip(s, got):
        ref = complex(oracles.error(entry.family.value, k, si * h))
        assert abs(gi - ref) <= 1e-13 * max(1.0, abs(ref))


def test_scalar_and_array_return_types():
    spec = closed_form("BDF2", "classical", h=1e-3)
    assert isinstance(relative_error(spec, 10j), complex)
    assert relative_error(spec, np.ones((2, 3)) * 1j).shape == (2, 3)


def test_derivative_matches_finite_difference():
    spec = closed_form("BDF3", "modified", 377.0, 1e-3)
    s0 = 200j
    d = 1e-3
    fd = (relative_error(spec, s0 + d / spec.h) - relative_error(spec, s0 - d / spec.h)) / (2 * d)
    assert abs(error_derivative(spec, s0, 1) - fd) < 1e-6


@pytest.mark.parametrize("entry", catalog(), ids=lambda e: f"{e.variant.value}-{e.family.value}")
@pytest.mark.parametrize("x", [0.1, 0.5, 1.0])
def test_verify_roots_catalog(entry, x):
    h = 1e-3
    spec = entry.spec(x / h, h)
    checks = verify_roots(spec, entry.root_spec(x / h), 1e-8)
    assert all(c.passed for c in checks), checks
    assert all(c.observed == c.claimed for c in checks)


def test_verify_roots_detects_wrong_multiplicity():
    spec = closed_form("GenAB2_2ndDeriv", "classical", h=1.0)
    assert verify_roots(spec, RootSpec(((0j, 5),)))[0].passed
    over = verify_roots(spec, RootSpec(((0j, 6),)))[0]
    under = verify_roots(spec, RootSpec(((0j, 4),)))[0]
    assert not over.passed and not under.passed and over.observed == 5
    wrong = verify_roots(closed_form("AB2", "modified", 0.5, 1.0), RootSpec(((0.6j, 1),)))[0]
    assert not wrong.passed and wrong.observed == 0


def test_verify_roots_rejects_bad_tol():
    with pytest.raises(ValueError):
        verify_roots(closed_form("AB2", "classical", h=1.0), RootSpec(((0j, 1),)), tol=0)


def test_sweep_linear_and_log():
    spec = closed_form("AB2", "modified", 2 * math.pi * 60, 1e-3)
    rows = sweep(spec, 0, 120, 3)
    assert [r.frequency for r in rows] == [0, 60, 120]
    assert rows[1].magnitude < 1e-12
    rows = sweep(spec, 1, 1000, 4, spacing="log")
    assert rows[-1].frequency == pytest.approx(1000)
    for bad in [dict(f_min=5, f_max=1, n_points=3), dict(f_min=0, f_max=1, n_points=1),
                dict(f_min=0, f_max=1, n_points=3, spacing="log"), dict(f_min=0, f_max=1, n_points=3, spacing="x")]:
        with pytest.raises(ValueError):
            sweep(spec, **bad)


def test_numpy_fallback_matches_numba():
    code = ("import math; from frosim.coeffgen import closed_form; from frosim.response import relative_error;"
            "from frosim._accel import backend;"
            "print(backend(), repr(abs(relative_error(closed_form('AB2','classical',h=1.0), 1j*math.pi/2))))")
    outs = {}
    for flag in ("0", "1"):
        env = dict(os.environ, FROSIM_DISABLE_NUMBA=flag)
        res = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
        name, val = res.stdout.split()
        outs[name] = float(val)
    assert set(outs) == {"numba", "numpy"}
    assert outs["numba"] == outs["numpy"] == pytest.approx(AB2_CLASSICAL_QUARTER, rel=1e-15)
