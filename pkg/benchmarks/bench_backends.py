"""Timing comparison: compiled kernels vs the pure NumPy fallback.

Measures the hot kernels in isolation and a short end-to-end dual
propagation with each backend (the backend is chosen at import, so the
end-to-end comparison re-runs this script in a subprocess with
SE23SIM_BACKEND set).

Run:  python benchmarks/bench_backends.py
"""

import os
import subprocess
import sys
import time
from dataclasses import replace

import numpy as np


def time_call(fn, *args, min_time=0.4):
    fn(*args)
    n, elapsed = 0, 0.0
    t0 = time.perf_counter()
    while elapsed < min_time:
        fn(*args)
        n += 1
        elapsed = time.perf_counter() - t0
    return elapsed / n


def bench_kernels():
    from se23sim import _purepy
    mods = [_purepy]
    try:
        from se23sim import _core
        mods.insert(0, _core)
    except ImportError:
        print("compiled backend not built; kernel table shows python only")

    rng = np.random.default_rng(1)
    xi = rng.normal(size=9) * np.array([1e5] * 3 + [1e2] * 3 + [0.2] * 3)
    pbar = np.array([2.0e7, 1.0e6, -3.0e6])
    vbar = np.array([100.0, -3000.0, 500.0])
    Rbar = _purepy.so3_exp(np.array([0.2, -0.1, 0.3]))
    n_bar = np.concatenate([np.zeros(3), [1e-3, 0, 0], [2e-4, 1e-4, 1e-4]])
    n_til = np.concatenate([np.zeros(3), [1e-3, 0, 0], [0, 0, 0]])
    mu = 3.986004418e14

    cases = {
        "so3_exp": lambda m: m.so3_exp(xi[6:9]),
        "se23_exp": lambda m: m.se23_exp(xi),
        "se23_log": lambda m: m.se23_log(Rbar, vbar, pbar * 1e-2),
        "jr_inv (series)": lambda m: m.jr_inv(xi),
        "big_adjoint": lambda m: m.big_adjoint(Rbar, vbar, pbar),
        "error_rhs (fused)": lambda m: m.error_rhs(
            xi, pbar, vbar, Rbar, n_bar, n_til, mu, True),
        "classical_rhs_pv": lambda m: m.classical_rhs_pv(
            pbar, vbar, Rbar, n_til[3:6], mu),
    }

    print(f"{'kernel':<20}" + "".join(f"{m.BACKEND:>14}" for m in mods)
          + ("      speedup" if len(mods) == 2 else ""))
    for name, call in cases.items():
        times = [time_call(call, m) for m in mods]
        row = f"{name:<20}" + "".join(f"{t * 1e6:>11.2f} us" for t in times)
        if len(times) == 2:
            row += f"{times[1] / times[0]:>11.1f}x"
        print(row)


def bench_validate():
    import se23sim
    from se23sim import runner
    from se23sim.scenario import molniya_scenario
    import tempfile

    sc = molniya_scenario()
    sc = replace(sc, duration_orbits=0.25)
    with tempfile.TemporaryDirectory() as out:
        t0 = time.perf_counter()
        runner.run_validate(sc, out)
        elapsed = time.perf_counter() - t0
    print(f"validate (0.25 orbit), backend={se23sim.BACKEND}: {elapsed:.2f} s")


if __name__ == "__main__":
    if os.environ.get("_BENCH_CHILD") == "1":
        bench_validate()
        sys.exit(0)

    bench_kernels()
    print()
    for backend in ("compiled", "python"):
        env = dict(os.environ, SE23SIM_BACKEND=backend, _BENCH_CHILD="1")
        res = subprocess.run([sys.executable, __file__], env=env,
                             capture_output=True, text=True)
        out = res.stdout.strip() or res.stderr.strip()
        print(out if res.returncode == 0
              else f"backend {backend}: unavailable ({out.splitlines()[-1]})")
