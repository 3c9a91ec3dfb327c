import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from frosim.coeffgen import (CLASSICAL, Family, RootSpec, Variant, catalog, closed_form,
                             coefficient_agreement, condition_rows, solve_from_roots,
                             transcription_findings)
from frosim.errors import DegenerateArgument, SingularSystem

FAMILIES = [f.value for f in Family]
GRID = (0.05, 0.1, 0.2, 0.5, 1.0, 1.5)

# 50-digit oracle values at omega*h = 0.5, h = 1 (frozen)
GOLDEN_HALF = {
    "GenAB2_2ndDeriv": (-0.4669037724490183, 1.4669037724490183, 1.3894390033089584, 0.57746476914005991),
    "AB2": (1.0, 1.4070183119747395, -0.51068384244207253),
    "AB3": (1.0, 1.830428293706666, -1.2538382754385925, 0.42340998173192651),
    "BDF2": (1.3629546524702523, -0.36295465247025226, 0.69603891899780803),
    "BDF3": (1.6332765020633592, -0.82744387485912033, 0.19416737279576118, 0.56089087073240202),
}


def test_classical_values():
    assert closed_form("AB2", "classical", h=1).coeffs == (1.0, 1.5, -0.5)
    assert closed_form("AB3", "classical", h=1).coeffs == pytest.approx((1, 23 / 12, -16 / 12, 5 / 12), abs=1e-15)
    assert closed_form("BDF2", "classical", h=1).coeffs == pytest.approx((4 / 3, -1 / 3, 2 / 3), abs=1e-15)
    assert closed_form("BDF3", "classical", h=1).coeffs == pytest.approx((18 / 11, -9 / 11, 2 / 11, 6 / 11), abs=1e-15)
    assert CLASSICAL[Family.BDF3][-1] == Fraction(6, 11)


def test_classical_scaling_with_h():
    h = 1e-3
    gen = closed_form("GenAB2_2ndDeriv", "classical", h=h).coeffs
    ref = closed_form("GenAB2_2ndDeriv", "classical", h=1.0).coeffs
    assert gen == pytest.approx((ref[0] * h, ref[1] * h, ref[2] * h**2, ref[3] * h**2), rel=1e-15)


@pytest.mark.parametrize("family", FAMILIES)
def test_golden_half(family):
    got = closed_form(family, "modified", 0.5, 1.0).coeffs
    assert coefficient_agreement(got, GOLDEN_HALF[family]) < 1e-13


@pytest.mark.parametrize("family", FAMILIES)
@pytest.mark.parametrize("x", GRID + (2.0, 3.0))
def test_closed_form_matches_oracle(family, x):
    ref = oracles.dimensional(family, oracles.modified_coefficients(family, x), 1.0)
    assert coefficient_agreement(closed_form(family, "modified", x, 1.0).coeffs, ref) < 1e-12


@pytest.mark.parametrize("family", FAMILIES)
def test_dimensional_coefficients(family):
    h, w = 1e-3, 2 * math.pi * 60
    spec = closed_form(family, "modified", w, h)
    ref = oracles.dimensional(family, oracles.modified_coefficients(family, w * h), h)
    assert coefficient_agreement(spec.coeffs, ref) < 1e-12
    assert spec.dimensionless() == pytest.approx(closed_form(family, "modified", w * h, 1.0).coeffs, rel=1e-13)


@pytest.mark.parametrize("family", FAMILIES)
def test_solver_matches_closed_form(family):
    entry = next(e for e in catalog() if e.family.value == family and e.variant is Variant.MODIFIED)
    for x in GRID:
        a = closed_form(family, "modified", x, 1.0).coeffs
        b = solve_from_roots(family, entry.root_spec(x), 1.0).coeffs
        assert coefficient_agreement(a, b) < 1e-12


@pytest.mark.parametrize("family", FAMILIES)
def test_classical_limit(family):
    a = closed_form(family, "modified", 1e-2, 1.0).coeffs
    b = closed_form(family, "classical", 0, 1.0).coeffs
    assert coefficient_agreement(a, b) < 1e-3


def test_small_argument_returns_classical():
    assert closed_form("BDF3", "modified", 5e-4, 1.0).coeffs == closed_form("BDF3", "classical", 0, 1.0).coeffs


@pytest.mark.parametrize("bad", [dict(omega=0.0, h=1.0), dict(omega=math.pi, h=1.0),
                                 dict(omega=4.0, h=1.0), dict(omega=1.0, h=0.0), dict(omega=-1.0, h=1.0)])
def test_degenerate_arguments(bad):
    with pytest.raises(DegenerateArgument):
        closed_form("AB2", "modified", **bad)


def test_unknown_family():
    with pytest.raises(ValueError):
        closed_form("AB4")


def test_catalog_shape():
    cat = catalog()
    assert len(cat) == 10
    assert {(e.family, e.variant) for e in cat} == {(f, v) for f in Family for v in Variant}
    gen = next(e for e in cat if e.family is Family.GEN_AB2 and e.variant is Variant.MODIFIED)
    assert gen.effective_conditions == 4
    for e in cat:
        rs = e.root_spec(0.3)
        assert rs.is_conjugate_symmetric()


def test_root_spec_design():
    rs = RootSpec.design(2.0, zero_mult=2, pair_mult=1)
    assert rs.total == 4
    assert not RootSpec(((1j, 1),)).is_conjugate_symmetric()


def test_solver_rejects_overdetermined():
    # three conditions for GenAB2 after the trivial zeroth-order row: underdetermined
    with pytest.raises((SingularSystem, ValueError)):
        solve_from_roots("GenAB2_2ndDeriv", RootSpec.design(0.5, zero_mult=2, pair_mult=1), 1.0)


def test_condition_rows_drop_trivial():
    A, b, trivial = condition_rows("GenAB2_2ndDeriv", RootSpec.design(0.5, 3, 1), 1.0)
    assert A.shape[0] == 4 and trivial


def test_transcription_findings_flag_printed_forms():
    found = transcription_findings(GRID, 1.0)
    fams = {(f.family, f.coefficient) for f in found}
    assert (Family.GEN_AB2, "b-1") in fams and (Family.GEN_AB2, "b-2") in fams
    assert (Family.BDF3, "b0") in fams
    assert not any(f.family in (Family.AB2, Family.AB3, Family.BDF2) for f in found)


@settings(max_examples=40, deadline=None)
@given(family=st.sampled_from(FAMILIES), x=st.floats(0.002, 3.0))
def test_property_closed_form_zeroes_error_at_omega(family, x):
    spec = closed_form(family, "modified", x, 1.0)
    k = spec.dimensionless()
    z = 1j * x
    e = complex(oracles.error(family, [float(v) for v in k], z))
    scale = max(1.0, float(np.max(np.abs(k))))
    assert abs(e) < 1e-12 * scale
