"""Compare the compiled kernels with the numpy fallback.

Usage::

    python3 benchmarks/bench_kernels.py [--sizes 128 512 2048] [--repeat 5]

Prints per-call times of each kernel for both backends, then the wall time
of a short end-to-end run with each backend selected through
``CATTANEO_PURE_PYTHON``.
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from cattaneo_sphere._kernels import _fallback, compiled

RUN_SNIPPET = """
import time
from cattaneo_sphere import BACKEND_NAME, PhysParams, RadialGrid, StepControl, perturbation_data, run
g = RadialGrid(1.0, 2.0, {n})
p = PhysParams()
t0 = time.perf_counter()
_, rep = run(perturbation_data(g, 0.01, 1, p), g, p, "RELAXED", StepControl(t_end={t_end}))
print(BACKEND_NAME, rep.steps, time.perf_counter() - t0)
"""


def make_inputs(n):
    n1 = n + 1
    r = np.linspace(1.0, 2.0, n1)
    x = r - 1.0
    wave = np.sin(np.pi * x)
    fields = [1 + 0.01 * wave, 0.01 * wave, 1 + 0.01 * wave, 0.01 * wave]
    ones = np.ones(n1)
    coeffs = dict(tau_n=0.1 * ones, kap=ones, a=0.1 * ones, ap=-0.1 * ones, Z=0.1 * ones,
                  nu=0.233 * ones, nup=np.zeros(n1), mu=0.1 * ones, lam=0.1 * ones)
    return r, fields, coeffs


def kernel_calls(mod, n):
    r, (rho, u, th, q), c = make_inputs(n)
    dr = r[1] - r[0]
    outs = [np.zeros((4, n + 1)) for _ in range(3)]
    bands = [np.zeros(n + 1) for _ in range(3)]
    x = np.empty(n + 1)
    mod.heat_bands(rho, c["kap"], r, dr, 1.0, *bands)
    return {
        "rhs_parts": lambda: mod.rhs_parts(rho, u, th, q, r, dr, c["tau_n"], c["kap"], c["a"], c["ap"], c["Z"],
                                           c["nu"], c["nup"], c["mu"], c["lam"], 1.0, 1.0, 0, 0.5, True, *outs),
        "viscous_bands": lambda: mod.viscous_bands(rho, th, c["nu"], c["nup"], r, dr, *[np.zeros(n + 1) for _ in range(3)]),
        "heat_bands": lambda: mod.heat_bands(rho, c["kap"], r, dr, 1.0, *[np.zeros(n + 1) for _ in range(3)]),
        "solve_shifted": lambda: mod.solve_shifted(*bands, 1e-3, th, x),
    }


def per_call(fn, repeat):
    number = 200
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


def end_to_end(n, t_end, pure):
    env = dict(os.environ)
    env["CATTANEO_PURE_PYTHON"] = "1" if pure else "0"
    out = subprocess.run([sys.executable, "-c", RUN_SNIPPET.format(n=n, t_end=t_end)], env=env,
                         capture_output=True, text=True, check=True)
    name, steps, seconds = out.stdout.split()
    return name, int(steps), float(seconds)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[128, 512, 2048])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--run-n", type=int, default=256)
    ap.add_argument("--run-t-end", type=float, default=0.5)
    args = ap.parse_args(argv)
    if compiled is None:
        print("compiled core not built; only the fallback is available")
        return 1
    print(f"{'kernel':<15}{'n':>6}{'fallback us':>14}{'compiled us':>14}{'speedup':>10}")
    for n in args.sizes:
        slow, fast = kernel_calls(_fallback, n), kernel_calls(compiled, n)
        for name in slow:
            a, b = per_call(slow[name], args.repeat), per_call(fast[name], args.repeat)
            print(f"{name:<15}{n:>6}{a * 1e6:>14.2f}{b * 1e6:>14.2f}{a / b:>10.1f}")
    print()
    print(f"end-to-end run, n = {args.run_n}, t_end = {args.run_t_end}")
    timings = {}
    for pure in (True, False):
        name, steps, seconds = end_to_end(args.run_n, args.run_t_end, pure)
        timings[name] = seconds
        print(f"  {name:<9} {steps} steps in {seconds:.3f} s")
    print(f"  speedup {timings['fallback'] / timings['compiled']:.2f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
