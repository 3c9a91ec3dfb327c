"""Bundled test systems."""
from __future__ import annotations

import math

import numpy as np

from ._accel import njit
from .dae_core import DaeSystem
from .errors import ConfigInvalid

OMEGA_60HZ = 2 * math.pi * 60


class ScalarLinear(DaeSystem):
    """xdot = lam * x."""

    n_diff, n_alg = 1, 0
    names = ("x",)
    omega_classes = ("zero",)
    solver_family = "BDF2"

    def __init__(self, lam=-1.0, x0=1.0):
        self.lam, self.x0 = float(lam), float(x0)

    def model(self, t, x, y, ydot, u, udot):
        return self.lam * x, np.zeros(0), np.zeros(0)

    def jacobian(self, t, x, y, ydot, u, udot):
        return np.array([[self.lam]])

    def initial_state(self):
        return np.array([self.x0])

    def exact(self, t):
        return self.x0 * math.exp(self.lam * t)


class SinusoidBank(DaeSystem):
    """Decoupled rotation pairs x1' = -w x2, x2' = w x1 at multiples of the utility frequency."""

    n_alg = 0
    solver_family = "GenAB2_2ndDeriv"

    def __init__(self, omega_utility=OMEGA_60HZ, harmonics=(1,), amplitude=1.0, phase=0.3):
        harmonics = [int(k) for k in harmonics]
        if not harmonics or min(harmonics) < 1:
            raise ConfigInvalid("harmonics must be positive integers")
        self.harmonics = harmonics
        self.w = np.repeat([k * omega_utility for k in harmonics], 2)
        self.amplitude, self.phase = float(amplitude), float(phase)
        self.n_diff = 2 * len(harmonics)
        self.names = tuple(f"{c}{k}" for k in harmonics for c in ("c", "s"))
        cls = {1: "utility", 2: "second_harmonic"}
        self.omega_classes = tuple(cls.get(k, float(k * omega_utility)) for k in harmonics for _ in (0, 1))
        n = self.n_diff
        self._jac = np.zeros((n, n))
        for i in range(0, n, 2):
            self._jac[i, i + 1] = -self.w[i]
            self._jac[i + 1, i] = self.w[i]

    def _rot(self, x):
        out = np.empty_like(x)
        out[0::2] = -self.w[0::2] * x[1::2]
        out[1::2] = self.w[1::2] * x[0::2]
        return out

    def model(self, t, x, y, ydot, u, udot):
        return self._rot(x), np.zeros(0), np.zeros(0)

    def jacobian(self, t, x, y, ydot, u, udot):
        return self._jac

    def exact(self, t):
        ph = self.w[0::2] * t + self.phase
        out = np.empty(self.n_diff)
        out[0::2] = self.amplitude * np.cos(ph)
        out[1::2] = self.amplitude * np.sin(ph)
        return out

    def initial_state(self):
        return self.exact(0.0)

    def prehistory(self, h, count):
        out = []
        for k in range(count, 0, -1):
            t = -k * h
            x = self.exact(t)
            xd = self._rot(x)
            out.append((t, x, xd, -self.w**2 * x))
        return out


# ---------------------------------------------------------------------------
# three-phase surrogate
# ---------------------------------------------------------------------------
#
# x = [i_a, i_b, i_c, z]   y = [v_a, v_b, v_c, p]   unknowns [x, y, ydot]
#   L di/dt = e - R i - v
#   0 = i - G v (1 + alpha v^2) - Yf v         (per phase, Yf = 1/Rf on faulted phases)
#   0 = p - sum v i
#   dz/dt = (p - z) / tau

@njit
def _surrogate_eval(t, X, prm, yf):
    E, w, R, L, tau, alpha = prm[0], prm[1], prm[2], prm[3], prm[4], prm[5]
    f = np.empty(4)
    g = np.empty(4)
    gd = np.empty(4)
    jac = np.zeros((12, 12))
    p = X[7]
    pd = X[11]
    gp = p
    gdp = pd
    for k in range(3):
        ang = w * t - 2.0 * math.pi * k / 3.0
        e = E * math.cos(ang)
        i = X[k]
        v = X[4 + k]
        vd = X[8 + k]
        G = prm[6 + k]
        fk = (e - R * i - v) / L
        f[k] = fk
        cond = G * (1.0 + 3.0 * alpha * v * v) + yf[k]
        g[k] = i - G * v * (1.0 + alpha * v * v) - yf[k] * v
        gd[k] = fk - cond * vd
        gp -= v * i
        gdp -= vd * i + v * fk
        # f rows
        jac[k, k] = -R / L
        jac[k, 4 + k] = -1.0 / L
        # g rows
        jac[4 + k, k] = 1.0
        jac[4 + k, 4 + k] = -cond
        jac[7, k] = -v
        jac[7, 4 + k] = -i
        # dg/dt rows
        jac[8 + k, k] = -R / L
        jac[8 + k, 4 + k] = -1.0 / L - 6.0 * G * alpha * v * vd
        jac[8 + k, 8 + k] = -cond
        jac[11, k] = -vd + v * R / L
        jac[11, 4 + k] = -fk + v / L
        jac[11, 8 + k] = -i
    f[3] = (p - X[3]) / tau
    jac[3, 3] = -1.0 / tau
    jac[3, 7] = 1.0 / tau
    jac[7, 7] = 1.0
    jac[11, 11] = 1.0
    g[3] = gp
    gd[3] = gdp
    return f, g, gd, jac


@njit
def _surrogate_derivatives(t, X, prm):
    E, w, R, L, tau = prm[0], prm[1], prm[2], prm[3], prm[4]
    xd = np.empty(4)
    xdd = np.empty(4)
    for k in range(3):
        ang = w * t - 2.0 * math.pi * k / 3.0
        fk = (E * math.cos(ang) - R * X[k] - X[4 + k]) / L
        xd[k] = fk
        xdd[k] = (-E * w * math.sin(ang) - R * fk - X[8 + k]) / L
    xd[3] = (X[7] - X[3]) / tau
    xdd[3] = (X[11] - xd[3]) / tau
    return xd, xdd


class SurrogateThreePhase(DaeSystem):
    """Unbalanced three-phase RL feeder with a mildly nonlinear load and a fault branch."""

    n_diff, n_alg = 4, 4
    names = ("i_a", "i_b", "i_c", "z", "v_a", "v_b", "v_c", "p", "dv_a", "dv_b", "dv_c", "dp")
    omega_classes = ("utility",) * 3 + ("zero",) + ("utility",) * 3 + ("second_harmonic",)
    solver_family = "BDF2"
    der_scale = 1.0

    def __init__(self, omega_utility=OMEGA_60HZ, source=1.0, x_line=0.1, r_line=0.02,
                 loads=(1.0, 0.8, 0.6), alpha=0.05, tau=0.5, fault_phases=(1, 2)):
        if not (source > 0 and x_line > 0 and r_line >= 0 and tau > 0 and alpha >= 0):
            raise ConfigInvalid("surrogate parameters out of range")
        if len(loads) != 3 or min(loads) <= 0:
            raise ConfigInvalid("loads must be three positive conductances")
        self.omega = float(omega_utility)
        self.prm = np.array([source, self.omega, r_line, x_line / self.omega, tau, alpha, *loads], dtype=float)
        self.fault_phases = tuple(int(k) for k in fault_phases)
        self.yf = np.zeros(3)

    # inputs are the source voltages
    def inputs(self, t):
        E, w = self.prm[0], self.prm[1]
        return E * np.cos(w * t - 2 * np.pi * np.arange(3) / 3)

    def input_rates(self, t):
        E, w = self.prm[0], self.prm[1]
        return -E * w * np.sin(w * t - 2 * np.pi * np.arange(3) / 3)

    def partial_u(self, t, x, y, u):
        fu = np.zeros((4, 3))
        fu[np.arange(3), np.arange(3)] = 1.0 / self.prm[3]
        return fu

    def model(self, t, x, y, ydot, u, udot):
        f, g, gd, _ = _surrogate_eval(float(t), np.concatenate([x, y, ydot]), self.prm, self.yf)
        return f, g, gd

    def jacobian(self, t, x, y, ydot, u, udot):
        return _surrogate_eval(float(t), np.concatenate([x, y, ydot]), self.prm, self.yf)[3]

    def evaluate(self, t, X):
        return _surrogate_eval(t, X, self.prm, self.yf)

    def state_derivatives(self, t, X, second=True):
        xd, xdd = _surrogate_derivatives(t, X, self.prm)
        return xd, (xdd if second else None)

    def apply_event(self, action, parameter=None):
        if action == "apply_fault":
            if parameter is None or not parameter > 0:
                raise ConfigInvalid("apply_fault needs a positive fault resistance")
            self.yf[:] = 0.0
            self.yf[list(self.fault_phases)] = 1.0 / parameter
        elif action == "clear_fault":
            self.yf[:] = 0.0
        else:
            super().apply_event(action, parameter)

    def phasor_state(self):
        """Steady state of the linearized (alpha = 0) circuit at t = 0."""
        E, w, R, L, tau = self.prm[:5]
        G = self.prm[6:9]
        ph = np.exp(-2j * np.pi * np.arange(3) / 3)
        Z = R + 1j * w * L + 1.0 / (G + self.yf)
        I = E * ph / Z
        V = I / (G + self.yf)
        p_avg = 0.5 * np.sum((V * np.conj(I)).real)
        X = np.zeros(12)
        X[:3] = I.real
        X[3] = p_avg
        X[4:7] = V.real
        X[8:11] = (1j * w * V).real
        X[7] = np.sum(X[4:7] * X[:3])
        X[11] = np.sum(X[8:11] * X[:3] + X[4:7] * (1j * w * I).real)
        return X

    def initial_state(self):
        return self.phasor_state()


SYSTEMS = {
    "scalar_linear": ScalarLinear,
    "sinusoid_bank": SinusoidBank,
    "surrogate_threephase": SurrogateThreePhase,
}
