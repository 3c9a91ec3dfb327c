"""Integrator coefficients: closed forms and a root-condition solver.

Every method is a linear template whose error transfer function in the
normalized variable ``z = s*h`` reads

    E(z) = g(z) - sum_j  k_j * z**p_j * exp(-q_j z)

with unknown coefficients ``k_j`` (expressed in units of ``h**hpow_j``).
A method is designed by forcing ``E`` and some of its derivatives to vanish
at chosen points of the s-plane.  Coefficients are always ordered
most-recent-first:

    GenAB2_2ndDeriv  (b-1, b-2, c-1, c-2)
    AB2 / AB3        (a-1, b-1, ..., b-k)
    BDF2 / BDF3      (a-1, ..., a-k, b0)
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import NamedTuple, Sequence

import numpy as np

from ._series import X, Series, SeriesMath
from .errors import DegenerateArgument, DenominatorUnderflow, NonRealSolution, SingularSystem

#: below this omega*h the modified closed forms return the classical values
SMALL_ARGUMENT = 1e-3
#: below this omega*h closed forms are evaluated through their Taylor series
SERIES_SWITCH = 1.0
COND_LIMIT = 1e14
IMAG_TRUNCATION = 1e-10
UNDERFLOW = 1e-300


class Family(str, Enum):
    GEN_AB2 = "GenAB2_2ndDeriv"
    AB2 = "AB2"
    AB3 = "AB3"
    BDF2 = "BDF2"
    BDF3 = "BDF3"

    @classmethod
    def parse(cls, name):
        if isinstance(name, cls):
            return name
        key = str(name).strip().lower().replace("-", "").replace("_", "")
        for fam in cls:
            if key in (fam.value.lower().replace("_", ""), fam.name.lower().replace("_", "")):
                return fam
        if key in ("genab2", "gen2"):
            return cls.GEN_AB2
        raise ValueError(f"unknown integrator family {name!r}")


class Variant(str, Enum):
    MODIFIED = "modified"
    CLASSICAL = "classical"

    @classmethod
    def parse(cls, name):
        return name if isinstance(name, cls) else cls(str(name).strip().lower())


@dataclass(frozen=True)
class Template:
    kind: str                   # "gen2" | "ab" | "bdf"
    steps: int
    names: tuple
    hpow: tuple                 # power of h carried by each coefficient
    basis: tuple                # (p, q) per coefficient
    forcing: tuple              # (weight, p, q) terms of g(z)

    @property
    def n_free(self):
        return len(self.names)


def _ab(k):
    return Template(
        "ab", k,
        ("a-1",) + tuple(f"b-{i}" for i in range(1, k + 1)),
        (0,) + (1,) * k,
        ((0, 1),) + tuple((1, i) for i in range(1, k + 1)),
        ((1.0, 0, 0),),
    )


def _bdf(k):
    return Template(
        "bdf", k,
        tuple(f"a-{i}" for i in range(1, k + 1)) + ("b0",),
        (0,) * k + (1,),
        tuple((0, i) for i in range(1, k + 1)) + ((1, 0),),
        ((1.0, 0, 0),),
    )


TEMPLATES = {
    Family.GEN_AB2: Template(
        "gen2", 2, ("b-1", "b-2", "c-1", "c-2"), (1, 1, 2, 2),
        ((1, 1), (1, 2), (2, 1), (2, 2)),
        ((1.0, 0, 0), (-1.0, 0, 1)),
    ),
    Family.AB2: _ab(2),
    Family.AB3: _ab(3),
    Family.BDF2: _bdf(2),
    Family.BDF3: _bdf(3),
}

_F = Fraction
CLASSICAL = {
    Family.GEN_AB2: (_F(-1, 2), _F(3, 2), _F(17, 12), _F(7, 12)),
    Family.AB2: (_F(1), _F(3, 2), _F(-1, 2)),
    Family.AB3: (_F(1), _F(23, 12), _F(-4, 3), _F(5, 12)),
    Family.BDF2: (_F(4, 3), _F(-1, 3), _F(2, 3)),
    Family.BDF3: (_F(18, 11), _F(-9, 11), _F(2, 11), _F(6, 11)),
}


@dataclass(frozen=True)
class IntegratorSpec:
    family: Family
    variant: Variant
    omega: float
    h: float
    coeffs: tuple

    def __post_init__(self):
        tpl = TEMPLATES[self.family]
        if not self.h > 0:
            raise DegenerateArgument(f"step size must be positive, got {self.h}")
        if self.omega < 0:
            raise DegenerateArgument("omega_select must be non-negative")
        if self.variant is Variant.MODIFIED and not 0 < self.omega * self.h < math.pi:
            raise DegenerateArgument(f"omega*h = {self.omega * self.h} outside (0, pi)")
        if len(self.coeffs) != tpl.n_free:
            raise ValueError(f"{self.family.value} needs {tpl.n_free} coefficients")

    @property
    def template(self) -> Template:
        return TEMPLATES[self.family]

    @property
    def names(self):
        return self.template.names

    @property
    def steps(self):
        return self.template.steps

    def __getitem__(self, name):
        return self.coeffs[self.names.index(name)]

    def as_array(self):
        return np.asarray(self.coeffs, dtype=float)

    def dimensionless(self):
        """Coefficients divided by ``h**hpow`` (the z-domain unknowns)."""
        return self.as_array() / self.h ** np.asarray(self.template.hpow, dtype=float)

    @property
    def key(self):
        return (self.family, self.variant, float(self.omega), float(self.h))

    @property
    def label(self):
        return f"{self.variant.value}-{self.family.value}"


class RootSpec(NamedTuple):
    """Desired roots of the error expression as ``(s, multiplicity)`` pairs."""

    roots: tuple

    @classmethod
    def design(cls, omega=0.0, zero_mult=1, pair_mult=0):
        roots = []
        if pair_mult:
            roots += [(complex(0.0, omega), pair_mult), (complex(0.0, -omega), pair_mult)]
        if zero_mult:
            roots.append((0j, zero_mult))
        return cls(tuple(roots))

    @property
    def total(self):
        return sum(m for _, m in self.roots)

    def is_conjugate_symmetric(self, tol=1e-12):
        pool = {complex(r): m for r, m in self.roots}
        for r, m in pool.items():
            if abs(r.imag) > tol * max(1.0, abs(r)):
                mate = [m2 for r2, m2 in pool.items() if abs(r2 - r.conjugate()) <= tol * max(1.0, abs(r))]
                if mate != [m]:
                    return False
        return True


# ---------------------------------------------------------------------------
# closed forms
# ---------------------------------------------------------------------------

def _gen_ab2_forms(w, h, m, printed=False):
    x = w * h
    s, c = m.sin(x), m.cos(x)
    nb1 = (12 * h**3 * w**4 + 32 * w * s - 32 * h**2 * w**3 * s - 32 * w * c * s
           - 16 * h * w**2 * c + 12 * h**3 * w**4 * c + 16 * h * w**2 * c**2)
    nb2 = (32 * h * w**2 - 4 * h**3 * w**4 - 32 * w * s + 32 * w * c * s
           - 16 * h * w**2 * c - 4 * h**3 * w**4 * c - 16 * h * w**2 * c**2)
    if printed:
        den_b = 4 * w**2 * (-2 * s + w * h * c + w * h**2) + 4 * w**2 * (w * h * s + 2 * c - 2) ** 2
    else:
        den_b = 4 * w**2 * (-2 * s + w * h * c + w * h) ** 2 + 4 * w**2 * (w * h * s + 2 * c - 2) ** 2
    nc1 = w**2 * (16 * x**2 - 8 * x**3 * s + 96 * x * c * s + 24 * x**3 * c * s
                  - 96 * x * c**2 * s - 64 * c - 96 * x**2 * c + 128 * c**2
                  + 48 * x**2 * c**2 - 64 * c**3 + 32 * x**2 * c**3)
    s2 = m.sin(2 * x)
    nc2 = -8 * w**2 * (-10 * x**2 + 4 * x * s + 3 * x**3 * s - 2 * x * s2 - x**3 * s2 / 2
                       - 8 * c + 8 * x**2 * c + 16 * c**2 + 2 * x**2 * c**2
                       + 4 * x * s**3 - 8 * c**3)
    den_c = -16 * w**4 * (c - 1) * (-4 * x * s - 4 * c + x**2 * c + 4 + x**2)
    return [(nb1, den_b), (nb2, den_b), (nc1, den_c), (nc2, den_c)]


def _ab2_forms(w, h, m, printed=False):
    x = w * h
    s = m.sin(x)
    return [(1, 1), (m.cos(x) - m.cos(2 * x), w * s), (-m.tan(x / 2), w)]


def _ab3_forms(w, h, m, printed=False):
    x = w * h
    s, c = m.sin(x), m.cos(x)
    cot = 1 / m.tan(x / 2)
    ch = m.cos(x / 2)
    b2 = 4 / w * ch**2 * cot - 3 / w * cot - h * c / (1 - c)
    return [
        (1, 1),
        (-2 * m.cos(2 * x) + x * cot, 2 * w * s),
        (b2, 1),
        (-2 * c + x * cot, 2 * w * s),
    ]


def _bdf2_forms(w, h, m, printed=False):
    x = w * h
    c, c2 = m.cos(x), m.cos(2 * x)
    d = 3 + 4 * c + 2 * c2
    return [
        (4 + 6 * c + 2 * c2, d),
        (-(1 + 2 * c), d),
        (2 * m.sin(x) + 2 * m.sin(2 * x), w * d),
    ]


def _bdf3_forms(w, h, m, printed=False):
    x = w * h
    s, c = m.sin(x), m.cos(x)

    def sn(k):
        return m.sin(k * x)

    def cs(k):
        return m.cos(k * x)

    den = 4 * (-x + s + 2 * x * s**2) ** 2
    na1 = (4 * x**2 + 2 + 2 * c + 2 * x**2 * c - 2 * cs(2) - 2 * cs(3) + 2 * x**2 * cs(3)
           + 4 * x**2 * cs(4) + 6 * x * s - 2 * x * sn(2) - 6 * x * sn(3) - 2 * x * sn(4))
    na2 = (-4 * x**2 - 4 - 8 * c + 8 * x**2 * c + 4 * c**2 + 16 * x**2 * c**2 + 8 * c**3
           - 16 * x**2 * c**3 - 16 * x**2 * c**4 - 8 * x * s + 16 * x * c**2 * s
           + 16 * x * c**3 * s)
    na3 = (4 - 4 * x**2 * c - 4 * c**2 + 8 * x**2 * c**3 + 4 * x * s - 4 * x * c * s
           - 8 * x * c**2 * s)
    nb0 = 2 * h * (2 - c - 2 * cs(2) + cs(3) + 2 * x * s - 2 * x * sn(3))
    if not printed:
        nb0 = nb0 + 2 * h * x * sn(4)
    return [(na1, den), (na2, den), (na3, den), (nb0, den)]


_FORMS = {
    Family.GEN_AB2: _gen_ab2_forms,
    Family.AB2: _ab2_forms,
    Family.AB3: _ab3_forms,
    Family.BDF2: _bdf2_forms,
    Family.BDF3: _bdf3_forms,
}


@lru_cache(maxsize=None)
def _series_forms(family):
    """Taylor series in x = omega*h of the dimensionless closed forms."""
    out = []
    for num, den in _FORMS[family](X, 1, SeriesMath):
        ratio = num / den
        out.append(ratio if isinstance(ratio, Series) else Series.const(ratio))
    return tuple(out)


def _classical(family, h):
    tpl = TEMPLATES[family]
    return tuple(float(v) * h**p for v, p in zip(CLASSICAL[family], tpl.hpow))


def closed_form(family, variant="modified", omega=0.0, h=1.0, *, printed=False) -> IntegratorSpec:
    """Coefficients from the closed-form expressions.

    Modified variants need ``0 < omega*h < pi``. Below ``SMALL_ARGUMENT`` the
    classical coefficients are returned. With ``printed=True`` the expressions
    are evaluated literally in floating point, without the two typographical
    repairs (GenAB2 b-denominator, BDF3 b0 numerator) and without the
    series path; use it only to audit the published forms.
    """
    family, variant = Family.parse(family), Variant.parse(variant)
    omega, h = float(omega), float(h)
    if not h > 0:
        raise DegenerateArgument(f"step size must be positive, got {h}")
    if variant is Variant.CLASSICAL:
        return IntegratorSpec(family, variant, 0.0, h, _classical(family, h))

    x = omega * h
    if not 0 < x < math.pi:
        raise DegenerateArgument(f"modified {family.value} needs 0 < omega*h < pi, got {x!r}")
    if x < SMALL_ARGUMENT:
        return IntegratorSpec(family, variant, omega, h, _classical(family, h))

    tpl = TEMPLATES[family]
    if printed or x >= SERIES_SWITCH:
        forms = _FORMS[family](omega, h, math, printed=printed) if printed else _FORMS[family](x, 1.0, math)
        for _, den in forms:
            if abs(den) < UNDERFLOW:
                raise DenominatorUnderflow(f"closed-form denominator {den!r} at omega*h={x}")
        values = [num / den for num, den in forms]
        if printed:
            return IntegratorSpec(family, variant, omega, h, tuple(float(v) for v in values))
    else:
        values = [ser(x) for ser in _series_forms(family)]
    coeffs = tuple(float(v) * h**p for v, p in zip(values, tpl.hpow))
    return IntegratorSpec(family, variant, omega, h, coeffs)


# ---------------------------------------------------------------------------
# root-condition solver
# ---------------------------------------------------------------------------

def taylor_coeff(p, q, n):
    """Coefficient of z**n in z**p * exp(-q z)."""
    if n < p:
        return 0.0
    return (-q) ** (n - p) / math.factorial(n - p)


def basis_derivative(p, q, k, z):
    """k-th z-derivative of z**p exp(-q z) at complex z."""
    if z == 0:
        return math.factorial(k) * taylor_coeff(p, q, k)
    acc = 0j
    for i in range(min(k, p) + 1):
        acc += math.comb(k, i) * (math.factorial(p) / math.factorial(p - i)) * z ** (p - i) * (-q) ** (k - i)
    return acc * np.exp(-q * z)


def deflated(p, q, m0, z):
    """(phi(z) - sum_{n<m0} t_n z**n) / z**m0 for phi = z**p exp(-q z).

    Finite as z -> 0; summed as a series for small |q z| to avoid the
    cancellation of the direct form.
    """
    if abs(z) * max(q, 1) <= 4.0:
        n = max(m0, p)
        term = taylor_coeff(p, q, n) * z ** (n - m0)
        acc = term
        for n in range(n + 1, n + 80):
            term = taylor_coeff(p, q, n) * z ** (n - m0)
            acc += term
            if abs(term) <= 1e-18 * abs(acc):
                break
        return complex(acc)
    head = sum(taylor_coeff(p, q, n) * z**n for n in range(m0))
    return complex((z**p * np.exp(-q * z) - head) / z**m0)


def _forcing(tpl, fn):
    return sum(wt * fn(p, q) for wt, p, q in tpl.forcing)


def condition_rows(family, root_spec: RootSpec, h=1.0):
    """Linear conditions ``A k = b`` on the z-domain coefficients.

    Returns ``(A, b, trivial)`` where ``trivial`` counts conditions that
    hold identically (dropped from the system).
    """
    tpl = TEMPLATES[Family.parse(family)]
    zero_mult = sum(m for r, m in root_spec.roots if r == 0)
    others = [(complex(r) * h, m) for r, m in root_spec.roots if r != 0]
    rows, rhs, trivial = [], [], 0

    for k in range(zero_mult):
        row = [basis_derivative(p, q, k, 0) for p, q in tpl.basis]
        b = _forcing(tpl, lambda p, q: basis_derivative(p, q, k, 0))
        if all(v == 0 for v in row):
            if b != 0:
                raise SingularSystem(f"condition of order {k} at s=0 cannot be met by {family}")
            trivial += 1
            continue
        rows.append(np.asarray(row, dtype=complex))
        rhs.append(complex(b))

    def rows_at(z, k):
        if k == 0 and zero_mult:
            row = [deflated(p, q, zero_mult, z) for p, q in tpl.basis]
            b = _forcing(tpl, lambda p, q: deflated(p, q, zero_mult, z))
        else:
            row = [basis_derivative(p, q, k, z) for p, q in tpl.basis]
            b = _forcing(tpl, lambda p, q: basis_derivative(p, q, k, z))
        return np.asarray(row, dtype=complex), complex(b)

    used = [False] * len(others)
    for i, (z, m) in enumerate(others):
        if used[i]:
            continue
        used[i] = True
        mate = None
        if abs(z.imag) > 1e-14 * abs(z):
            for j in range(i + 1, len(others)):
                z2, m2 = others[j]
                if not used[j] and m2 == m and abs(z2 - z.conjugate()) <= 1e-12 * abs(z):
                    mate = j
                    break
        for k in range(m):
            r1, b1 = rows_at(z, k)
            if mate is None:
                rows.append(r1)
                rhs.append(b1)
                continue
            zc = others[mate][0]
            r2, b2 = rows_at(zc, k)
            # mean and divided difference of the conjugate pair: real and well
            # scaled as the pair collapses onto the real axis
            rows += [(r1 + r2) / 2, (r1 - r2) / (z - zc)]
            rhs += [(b1 + b2) / 2, (b1 - b2) / (z - zc)]
        if mate is not None:
            used[mate] = True
    A = np.array(rows, dtype=complex).reshape(len(rows), tpl.n_free)
    return A, np.array(rhs, dtype=complex), trivial


def solve_from_roots(family, root_spec: RootSpec, h=1.0) -> IntegratorSpec:
    """Coefficients making the given roots (with multiplicity) roots of E."""
    family = Family.parse(family)
    h = float(h)
    if not h > 0:
        raise DegenerateArgument("step size must be positive")
    if any(m < 1 for _, m in root_spec.roots):
        raise ValueError("root multiplicities must be positive integers")
    tpl = TEMPLATES[family]
    A, b, _ = condition_rows(family, root_spec, h)
    if A.shape[0] != tpl.n_free:
        raise SingularSystem(
            f"{A.shape[0]} effective conditions for {tpl.n_free} coefficients of {family.value}")
    cond = np.linalg.cond(A)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise SingularSystem(f"condition estimate {cond:.3g} exceeds {COND_LIMIT:g}")
    k = np.linalg.solve(A, b)
    mag = np.maximum(np.abs(k), 1e-12 * max(np.abs(k).max(), 1e-300))
    if np.any(np.abs(k.imag) > IMAG_TRUNCATION * mag):
        raise NonRealSolution(f"coefficients have imaginary parts {k.imag}")
    coeffs = tuple(float(v) * h**p for v, p in zip(k.real, tpl.hpow))
    nonzero = [abs(r.imag) for r, _ in root_spec.roots if r != 0]
    omega = max(nonzero) if nonzero else 0.0
    variant = Variant.MODIFIED if nonzero else Variant.CLASSICAL
    if variant is Variant.MODIFIED and not 0 < omega * h < math.pi:
        # roots off the imaginary axis or beyond the Nyquist band: keep the
        # coefficients but report as classical-shaped data
        variant, omega = Variant.CLASSICAL, 0.0
    return IntegratorSpec(family, variant, omega, h, coeffs)


# ---------------------------------------------------------------------------
# catalog
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CatalogEntry:
    family: Family
    variant: Variant
    structure: tuple            # (("+jw", 1), ("-jw", 1), ("0", 3)) etc.
    n_free: int
    effective_conditions: int = field(default=0)

    @property
    def zero_multiplicity(self):
        return dict(self.structure).get("0", 0)

    @property
    def total_multiplicity(self):
        return sum(m for _, m in self.structure)

    def root_spec(self, omega=0.0) -> RootSpec:
        pair = dict(self.structure).get("+jw", 0)
        return RootSpec.design(omega, self.zero_multiplicity, pair)

    def spec(self, omega=0.0, h=1.0) -> IntegratorSpec:
        return closed_form(self.family, self.variant, omega if self.variant is Variant.MODIFIED else 0.0, h)


_DESIGN = [
    (Family.GEN_AB2, 3, 5),
    (Family.AB3, 2, 4),
    (Family.BDF3, 2, 4),
    (Family.AB2, 1, 3),
    (Family.BDF2, 1, 3),
]


def catalog() -> list:
    """The ten methods with their designed root structure."""
    out = []
    for family, zero_mod, zero_cls in _DESIGN:
        n_free = TEMPLATES[family].n_free
        for variant, structure in (
            (Variant.MODIFIED, (("+jw", 1), ("-jw", 1), ("0", zero_mod))),
            (Variant.CLASSICAL, (("0", zero_cls),)),
        ):
            probe = RootSpec.design(0.5, dict(structure)["0"], dict(structure).get("+jw", 0))
            A, _, _ = condition_rows(family, probe)
            out.append(CatalogEntry(family, variant, structure, n_free, A.shape[0]))
    return out


def coefficient_agreement(a: Sequence[float], b: Sequence[float]) -> float:
    """Largest per-coefficient relative difference."""
    a, b = np.asarray(a, float), np.asarray(b, float)
    scale = np.maximum(np.abs(b), 1e-300)
    return float(np.max(np.abs(a - b) / scale))


class TranscriptionFinding(NamedTuple):
    family: Family
    omega_h: float
    coefficient: str
    printed: float
    solver: float
    rel_diff: float


def transcription_findings(grid=(0.05, 0.1, 0.2, 0.5, 1.0, 1.5), h=1.0, threshold=1e-6):
    """Literal closed forms that disagree with the root solver beyond ``threshold``."""
    found = []
    for family, zero_mod, _ in _DESIGN:
        for x in grid:
            omega = x / h
            ref = solve_from_roots(family, RootSpec.design(omega, zero_mod, 1), h)
            lit = closed_form(family, Variant.MODIFIED, omega, h, printed=True)
            for name, pv, sv in zip(ref.names, lit.coeffs, ref.coeffs):
                rel = abs(pv - sv) / max(abs(sv), 1e-300)
                if not rel <= threshold:
                    found.append(TranscriptionFinding(family, x, name, pv, sv, rel))
    return found
