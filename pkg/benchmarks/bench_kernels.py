"""Compare the numba-compiled kernels against the pure-numpy fallback.

Each backend runs in its own interpreter because the choice is made at import
time from FROSIM_DISABLE_NUMBA.  Usage::

    python benchmarks/bench_kernels.py            # both backends, table
    python benchmarks/bench_kernels.py --child    # current backend, JSON
"""
import argparse
import json
import math
import os
import subprocess
import sys
import time
import timeit

import numpy as np


def _best(fn, number):
    return min(timeit.repeat(fn, number=number, repeat=5)) / number


def child(t_end):
    from frosim import kernels
    from frosim._accel import backend
    from frosim.dae_core import NewtonConfig
    from frosim.harness import Event, ScenarioConfig, run
    from frosim.scenarios import SurrogateThreePhase

    dae = SurrogateThreePhase()
    X = dae.phasor_state()
    nd, na = dae.n_diff, dae.n_alg
    rng = np.random.default_rng(0)
    values, d1, d2 = rng.normal(size=(3, 4, nd + na))
    gen, ab, bdf = rng.normal(size=(4, nd)), rng.normal(size=(4, na)), rng.normal(size=(4, na)) + 2.0
    slots = np.array([3, 2, 1, 0])
    c, gamma = rng.normal(size=nd), np.full(nd, 3e-4)
    f, g, gd, jac = dae.evaluate(0.0, X)
    A = jac + 12 * np.eye(len(X))
    b = rng.normal(size=len(X))

    # first call compiles under numba; keep it out of the timings
    kernels.predict_all(gen, ab, bdf, values, d1, d2, slots, nd, na)
    kernels.assemble_step(X, c, gamma, f, g, gd, jac, 1.0, nd, na)
    kernels.solve_dense(A, b)
    dae.evaluate(0.0, X)

    out = {"backend": backend()}
    out["predict_all"] = _best(lambda: kernels.predict_all(gen, ab, bdf, values, d1, d2, slots, nd, na), 2000)
    out["assemble_step"] = _best(lambda: kernels.assemble_step(X, c, gamma, f, g, gd, jac, 1.0, nd, na), 2000)
    out["solve_dense"] = _best(lambda: kernels.solve_dense(A, b), 2000)
    out["surrogate_eval"] = _best(lambda: dae.evaluate(0.0, X), 2000)

    cfg = ScenarioConfig("surrogate_threephase", 0.01, 5e-4, (), NewtonConfig(1e-8))
    run(cfg, "predicted")
    cfg = ScenarioConfig("surrogate_threephase", t_end, 5e-4,
                         (Event(0.1 * t_end, "apply_fault", 0.001), Event(0.3 * t_end, "clear_fault")),
                         NewtonConfig(1e-8))
    start = time.perf_counter()
    rep = run(cfg, "predicted")
    out["transient_loop"] = time.perf_counter() - start
    out["anits"] = rep.anits
    return out


def spawn(disable, t_end):
    env = dict(os.environ, FROSIM_DISABLE_NUMBA="1" if disable else "0")
    res = subprocess.run([sys.executable, __file__, "--child", "--t-end", str(t_end)],
                         env=env, capture_output=True, text=True, check=True)
    return json.loads(res.stdout)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--child", action="store_true", help="time the active backend and print JSON")
    ap.add_argument("--t-end", type=float, default=1.0, help="simulated seconds for the loop timing")
    args = ap.parse_args(argv)
    if args.child:
        print(json.dumps(child(args.t_end)))
        return 0

    fast, slow = spawn(False, args.t_end), spawn(True, args.t_end)
    if fast["backend"] != "numba":
        print("numba unavailable; both columns use the numpy path", file=sys.stderr)
    print(f"{'kernel':<16}{'numba':>14}{'numpy':>14}{'speedup':>10}")
    for key in ("predict_all", "assemble_step", "solve_dense", "surrogate_eval", "transient_loop"):
        unit, scale = ("s", 1.0) if key == "transient_loop" else ("us", 1e6)
        a, b = fast[key] * scale, slow[key] * scale
        print(f"{key:<16}{a:>12.3f}{unit:>2}{b:>12.3f}{unit:>2}{b / a:>9.1f}x")
    same = math.isclose(fast["anits"], slow["anits"], rel_tol=0, abs_tol=1e-12)
    print(f"ANITS numba={fast['anits']:.4f} numpy={slow['anits']:.4f} ({'match' if same else 'DIFFER'})")
    return 0


if __name__ == "__main__":
    sys.exit(main())
