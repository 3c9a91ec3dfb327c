"""Scenario configuration, simulation runs and guess-method comparisons."""
from __future__ import annotations

import io
import math
import statistics
import time
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np
import yaml

from .coeffgen import Family
from .dae_core import (Discretizer, GuessSource, HalfStepRule, NewtonConfig, StepClass,
                       StepRecord, anits, consistent_initial, schedule_steps, solve_step)
from .errors import ConfigInvalid, InsufficientHistory, NoConvergence, StepMismatch
from .history import StateHistory
from .predictor import CoefficientBank, GuessMode, PredictionPolicy, eligible, naive, predict
from .scenarios import OMEGA_60HZ, SYSTEMS

ACTIONS = ("apply_fault", "clear_fault")


@dataclass(frozen=True)
class Event:
    time: float
    action: str
    parameter: Optional[float] = None

    def __post_init__(self):
        if self.action not in ACTIONS:
            raise ConfigInvalid(f"unknown event action {self.action!r}")
        if self.action == "apply_fault" and not (self.parameter is not None and self.parameter > 0):
            raise ConfigInvalid("apply_fault needs a positive fault resistance")


@dataclass(frozen=True)
class ScenarioConfig:
    system: str
    t_end: float
    h: float
    events: tuple = ()
    newton: NewtonConfig = NewtonConfig()
    guess: GuessMode = GuessMode.PREDICTED
    omega_utility: float = OMEGA_60HZ
    omega: dict = field(default_factory=dict)   # per-state override: class name or rad/s
    solver_family: Optional[str] = None
    half_step: HalfStepRule = HalfStepRule.BACKWARD_EULER
    params: dict = field(default_factory=dict)
    name: str = ""

    def __post_init__(self):
        if self.system not in SYSTEMS:
            raise ConfigInvalid(f"unknown system {self.system!r}; choose from {sorted(SYSTEMS)}")
        if not (self.t_end > 0 and self.h > 0):
            raise ConfigInvalid("t_end and h must be positive")
        if not self.omega_utility > 0:
            raise ConfigInvalid("omega_utility must be positive")
        object.__setattr__(self, "guess", GuessMode(self.guess))
        object.__setattr__(self, "half_step", HalfStepRule(self.half_step))
        object.__setattr__(self, "events", tuple(sorted(self.events, key=lambda e: e.time)))
        for e in self.events:
            if not 0 <= e.time <= self.t_end:
                raise ConfigInvalid(f"event at {e.time} outside [0, t_end]")

    def with_(self, **kw) -> "ScenarioConfig":
        if "tol_inf" in kw:
            kw["newton"] = replace(self.newton, tol_inf=kw.pop("tol_inf"))
        return replace(self, **kw)

    @classmethod
    def from_mapping(cls, d: dict) -> "ScenarioConfig":
        d = dict(d)
        known = {"system", "t_end", "h", "events", "newton", "guess", "omega_utility", "omega",
                 "solver_family", "half_step", "params", "name"}
        extra = set(d) - known
        if extra:
            raise ConfigInvalid(f"unknown config keys {sorted(extra)}")
        for req in ("system", "t_end", "h"):
            if req not in d:
                raise ConfigInvalid(f"missing config key {req!r}")
        try:
            events = tuple(Event(float(e["time"]), str(e["action"]),
                                 None if e.get("parameter") is None else float(e["parameter"]))
                           for e in d.get("events") or ())
            nw = d.get("newton") or {}
            newton = NewtonConfig(float(nw.get("tol_inf", 1e-8)), int(nw.get("max_iter", 20)),
                                  nw.get("jacobian_refresh", "every_iteration"))
            return cls(system=str(d["system"]), t_end=float(d["t_end"]), h=float(d["h"]),
                       events=events, newton=newton, guess=d.get("guess", "predicted"),
                       omega_utility=float(d.get("omega_utility", OMEGA_60HZ)),
                       omega=dict(d.get("omega") or {}), solver_family=d.get("solver_family"),
                       half_step=d.get("half_step", "backward_euler"),
                       params=dict(d.get("params") or {}), name=str(d.get("name", "")))
        except ConfigInvalid:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigInvalid(f"invalid scenario config: {exc}") from exc


def load_config(path) -> ScenarioConfig:
    try:
        with open(path) as fh:
            data = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigInvalid(f"cannot read {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigInvalid(f"malformed YAML in {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigInvalid(f"{path} does not hold a mapping")
    return ScenarioConfig.from_mapping(data)


def resolve_omega(value, omega_utility) -> float:
    named = {"utility": 1.0, "second_harmonic": 2.0, "zero": 0.0}
    if isinstance(value, str):
        if value not in named:
            raise ConfigInvalid(f"unknown omega class {value!r}")
        return named[value] * omega_utility
    w = float(value)
    if w < 0:
        raise ConfigInvalid("omega must be >= 0")
    return w


@dataclass
class Built:
    dae: object
    x0: np.ndarray
    omega: list          # selected omega per state
    solver_family: Family


def build_scenario(cfg: ScenarioConfig) -> Built:
    cls = SYSTEMS[cfg.system]
    try:
        dae = cls(omega_utility=cfg.omega_utility, **cfg.params) if cfg.system != "scalar_linear" \
            else cls(**cfg.params)
    except TypeError as exc:
        raise ConfigInvalid(f"bad params for {cfg.system}: {exc}") from exc
    states = dae.names[:dae.n_states]
    unknown = set(cfg.omega) - set(states)
    if unknown:
        raise ConfigInvalid(f"omega given for unknown states {sorted(unknown)}")
    omega = [resolve_omega(cfg.omega.get(n, c), cfg.omega_utility) for n, c in zip(states, dae.omega_classes)]
    fam = Family.parse(cfg.solver_family or dae.solver_family)
    x0 = consistent_initial(dae, dae.initial_state())
    return Built(dae, x0, omega, fam)


@dataclass
class RunReport:
    config: ScenarioConfig
    names: tuple
    times: np.ndarray
    trace: np.ndarray            # (n_points, n_unknowns), row 0 is t = 0
    records: list
    wall_time: float
    generations: int = 0
    completed: bool = True

    @property
    def anits(self) -> float:
        return anits(self.records)

    def eligible_mask(self):
        cls = [r.step_class for r in self.records]
        return np.array([eligible(c, cls[i - 1] if i >= 1 else None, cls[i - 2] if i >= 2 else None)
                         for i, c in enumerate(cls)])

    def mean_guess_residual(self, eligible_only=True) -> float:
        vals = np.array([r.guess_residual for r in self.records])
        return float(np.mean(vals[self.eligible_mask()] if eligible_only else vals))

    def mean_guess_error(self, eligible_only=True) -> float:
        vals = np.array([r.guess_error for r in self.records])
        return float(np.mean(vals[self.eligible_mask()] if eligible_only else vals))

    def trace_csv(self) -> str:
        buf = io.StringIO()
        write_trace(self, buf)
        return buf.getvalue()


def _simulate(cfg: ScenarioConfig, mode: GuessMode):
    built = build_scenario(cfg)
    dae, h = built.dae, cfg.h
    nd, na = dae.n_diff, dae.n_alg
    ns = nd + na
    bank = CoefficientBank()
    disc = Discretizer([bank.get(built.solver_family, built.omega[j], h) for j in range(nd)], cfg.half_step)
    pred = None
    if mode is GuessMode.PREDICTED:
        pred = PredictionPolicy(mode, built.omega).bind(bank, h, nd, na)
    bank.freeze()
    generations = bank.generations
    need2 = disc.needs_second or pred is not None
    schedule = schedule_steps(cfg.t_end, h, [e.time for e in cfg.events])

    hist = StateHistory(ns, depth=4)
    nan_alg = np.full(na, np.nan)
    for t0, v, d1, d2 in dae.prehistory(h, 2) or ():
        hist.push(t0, v, d1, d2)
    X = built.x0
    xd, xdd = dae.state_derivatives(0.0, X, need2)
    hist.push(0.0, X[:ns], np.concatenate([xd, X[ns:]]), None if xdd is None else np.concatenate([xdd, nan_alg]))

    times = np.empty(len(schedule) + 1)
    trace = np.empty((len(schedule) + 1, dae.n_unknowns))
    times[0], trace[0] = 0.0, X
    records = []
    prev1 = prev2 = None
    start = time.perf_counter()
    for n, st in enumerate(schedule, start=1):
        if st.event is not None:
            ev = cfg.events[st.event]
            dae.apply_event(ev.action, ev.parameter)
            hist.mark_stale()
        guess, src = None, GuessSource.NAIVE
        if pred is not None and eligible(st.step_class, prev1, prev2):
            try:
                guess, src = predict(hist, pred), GuessSource.PREDICTED
            except (InsufficientHistory, StepMismatch):
                guess = None
        if guess is None:
            guess = naive(hist, nd, na)
        try:
            X, rec = solve_step(dae, disc, hist, st.t, guess, cfg.newton, st.step_class, st.h_step, src)
        except NoConvergence as exc:
            exc.partial = RunReport(cfg, dae.names, times[:n].copy(), trace[:n].copy(), records,
                                    time.perf_counter() - start, generations, completed=False)
            raise
        records.append(rec)
        xd, xdd = dae.state_derivatives(st.t, X, need2)
        hist.push(st.t, X[:ns], np.concatenate([xd, X[ns:]]),
                  None if xdd is None else np.concatenate([xdd, nan_alg]))
        times[n], trace[n] = st.t, X
        prev2, prev1 = prev1, st.step_class
    wall = time.perf_counter() - start
    if bank.generations != generations:
        raise RuntimeError("coefficients were generated inside the time loop")
    return RunReport(cfg, dae.names, times, trace, records, wall, generations)


def run(cfg: ScenarioConfig, guess=None, repeats: int = 1) -> RunReport:
    """Simulate ``cfg``; wall time is the median over ``repeats`` loop timings."""
    mode = GuessMode(guess) if guess is not None else cfg.guess
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    report = _simulate(cfg, mode)
    if repeats > 1:
        walls = [report.wall_time] + [_simulate(cfg, mode).wall_time for _ in range(repeats - 1)]
        report.wall_time = statistics.median(walls)
    return report


@dataclass
class CompareRow:
    h: float
    tol: float
    predicted: Optional[RunReport]
    naive: Optional[RunReport]
    failure: str = ""

    @property
    def anits_pred(self):
        return self.predicted.anits if self.predicted else math.nan

    @property
    def anits_naive(self):
        return self.naive.anits if self.naive else math.nan

    @property
    def time_pred(self):
        return self.predicted.wall_time if self.predicted else math.nan

    @property
    def time_naive(self):
        return self.naive.wall_time if self.naive else math.nan


def compare(cfg: ScenarioConfig, steps: Sequence[float], tols: Sequence[float], repeats: int = 3) -> list:
    """Run every (h, tol) cell under both guess modes, sequentially."""
    rows = []
    for h in steps:
        for tol in tols:
            cell = cfg.with_(h=float(h), tol_inf=float(tol))
            out, fail = {}, []
            for mode in (GuessMode.PREDICTED, GuessMode.NAIVE):
                try:
                    out[mode] = run(cell, mode, repeats)
                except NoConvergence as exc:
                    out[mode] = None
                    fail.append(f"{mode.value}: {exc}")
            rows.append(CompareRow(float(h), float(tol), out[GuessMode.PREDICTED], out[GuessMode.NAIVE],
                                   "; ".join(fail)))
    return rows


# ---------------------------------------------------------------------------
# CSV output
# ---------------------------------------------------------------------------

def _fmt(v):
    return format(v, ".17g")


def write_trace(report: RunReport, fh):
    fh.write(",".join(("t",) + tuple(report.names)) + "\n")
    for t, row in zip(report.times, report.trace):
        fh.write(_fmt(t) + "," + ",".join(map(_fmt, row)) + "\n")


COMPARE_COLUMNS = ("h_us", "tol", "anits_pred", "anits_naive", "time_pred_s", "time_naive_s")


def write_compare(rows: Sequence[CompareRow], fh):
    """Comparison table; ANITS is shown to 2 decimals, non-converged cells as NC."""
    fh.write(",".join(COMPARE_COLUMNS) + "\n")
    for r in rows:
        def a(rep):
            return f"{rep.anits:.2f}" if rep else "NC"

        def w(rep):
            return f"{rep.wall_time:.6f}" if rep else "NC"
        fh.write(f"{r.h * 1e6:.12g},{r.tol:.12g},{a(r.predicted)},{a(r.naive)},"
                 f"{w(r.predicted)},{w(r.naive)}\n")
