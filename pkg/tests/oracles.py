"""Independent high-precision references used by the test-suite.

Nothing here imports frosim: the error expressions are typed from the
discretization templates directly and the coefficient conditions are solved
as a real linear system in 50-digit arithmetic.
"""
import mpmath as mp

mp.mp.dps = 50

# basis functions phi_j(z) and forcing g(z) for each template, dimensionless
BASIS = {
    "GenAB2_2ndDeriv": [lambda z: z * mp.exp(-z), lambda z: z * mp.exp(-2 * z),
                        lambda z: z**2 * mp.exp(-z), lambda z: z**2 * mp.exp(-2 * z)],
    "AB2": [lambda z: mp.exp(-z), lambda z: z * mp.exp(-z), lambda z: z * mp.exp(-2 * z)],
    "AB3": [lambda z: mp.exp(-z), lambda z: z * mp.exp(-z), lambda z: z * mp.exp(-2 * z),
            lambda z: z * mp.exp(-3 * z)],
    "BDF2": [lambda z: mp.exp(-z), lambda z: mp.exp(-2 * z), lambda z: z],
    "BDF3": [lambda z: mp.exp(-z), lambda z: mp.exp(-2 * z), lambda z: mp.exp(-3 * z), lambda z: z],
}
FORCING = {
    "GenAB2_2ndDeriv": lambda z: 1 - mp.exp(-z),
    "AB2": lambda z: mp.mpf(1), "AB3": lambda z: mp.mpf(1),
    "BDF2": lambda z: mp.mpf(1), "BDF3": lambda z: mp.mpf(1),
}
HPOW = {
    "GenAB2_2ndDeriv": (1, 1, 2, 2), "AB2": (0, 1, 1), "AB3": (0, 1, 1, 1),
    "BDF2": (0, 0, 1), "BDF3": (0, 0, 0, 1),
}
# multiplicity of the root at 0 for modified variants (plus a simple +-j x pair)
ZERO_MULT_MODIFIED = {"GenAB2_2ndDeriv": 3, "AB2": 1, "AB3": 2, "BDF2": 1, "BDF3": 2}


def error(family, k, z):
    """E(z) for dimensionless coefficients ``k``."""
    z = mp.mpc(z)
    return FORCING[family](z) - mp.fsum(kj * phi(z) for kj, phi in zip(k, BASIS[family]))


def modified_coefficients(family, x):
    """Dimensionless modified coefficients at omega*h = x, as mpf."""
    basis = BASIS[family]
    g = FORCING[family]
    rows, rhs = [], []
    for n in range(ZERO_MULT_MODIFIED[family]):
        row = [mp.diff(phi, 0, n) for phi in basis]
        val = mp.diff(g, 0, n)
        if all(abs(r) < mp.mpf(10) ** -40 for r in row):
            continue            # condition holds for any coefficients
        rows.append(row)
        rhs.append(val)
    zj = mp.mpc(0, x)
    vals = [phi(zj) for phi in basis]
    gj = mp.mpc(g(zj))
    rows.append([v.real for v in vals])
    rhs.append(gj.real)
    rows.append([v.imag for v in vals])
    rhs.append(gj.imag)
    sol = mp.lu_solve(mp.matrix(rows), mp.matrix(rhs))
    return [sol[i] for i in range(len(basis))]


def dimensional(family, k, h):
    return [float(kj * mp.mpf(h) ** p) for kj, p in zip(k, HPOW[family])]
