"""Compiled core vs numpy fallback on the loops that dominate runtime.

Each backend runs in its own interpreter (the backend is picked at import),
so this script re-invokes itself once per backend and prints a table:

    python3 benchmarks/bench_kernels.py [--repeat 3] [--json]
"""
import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np


def workloads():
    from renyi_sdpi import KL, Renyi, divergence, make_measure
    from renyi_sdpi.sdpi import SearchConfig, eta_dd, eta_di, eta_infty_dd
    from renyi_sdpi.verify import random_kernel, random_measure

    rng = np.random.default_rng(7)
    mu4, K4 = random_measure(rng, 4), random_kernel(rng, 4, 4)
    mu6, K6 = random_measure(rng, 6), random_kernel(rng, 6, 5)
    K5 = random_kernel(rng, 5, 5)
    mu18, K18 = random_measure(rng, 18), random_kernel(rng, 18, 6)
    pairs = [(make_measure(rng.dirichlet(np.ones(8))), make_measure(rng.dirichlet(np.ones(8)))) for _ in range(200)]
    cfg = SearchConfig(restarts=16)

    def many_divergences():
        for nu, mu in pairs:
            divergence(nu, mu, Renyi(2.5))
            divergence(nu, mu, KL)

    return {
        "divergence x400 (n=8)": many_divergences,
        "eta_dd renyi(2) 4x4": lambda: eta_dd(mu4, K4, Renyi(2), cfg),
        "eta_dd renyi(4) 6x5": lambda: eta_dd(mu6, K6, Renyi(4), cfg),
        "eta_di renyi(3) 5x5": lambda: eta_di(K5, Renyi(3), cfg),
        "eta_infty_dd 18x6 (subset scan)": lambda: eta_infty_dd(mu18, K18),
    }


def worker(repeat):
    from renyi_sdpi import BACKEND

    out = {}
    for name, fn in workloads().items():
        fn()  # warm up caches and lazy imports
        best = float("inf")
        for _ in range(repeat):
            t0 = time.perf_counter()
            fn()
            best = min(best, time.perf_counter() - t0)
        out[name] = best
    return {"backend": BACKEND, "seconds": out}


def run_backend(force_python, repeat):
    env = dict(os.environ)
    env["SDPI_FORCE_PYTHON"] = "1" if force_python else "0"
    proc = subprocess.run([sys.executable, __file__, "--worker", "--repeat", str(repeat)],
                          env=env, capture_output=True, text=True, check=True)
    return json.loads(proc.stdout)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--json", action="store_true", help="print raw timings as JSON")
    ap.add_argument("--worker", action="store_true", help=argparse.SUPPRESS)
    args = ap.parse_args()
    if args.worker:
        print(json.dumps(worker(args.repeat)))
        return

    fast, slow = run_backend(False, args.repeat), run_backend(True, args.repeat)
    if args.json:
        print(json.dumps({"compiled": fast, "python": slow}, indent=2))
        return
    if fast["backend"] != "compiled":
        print("note: compiled core not available, both columns use the fallback")
    width = max(map(len, fast["seconds"]))
    print(f"{'workload':<{width}}  {'compiled':>10}  {'python':>10}  {'speedup':>8}")
    for name, t_fast in fast["seconds"].items():
        t_slow = slow["seconds"][name]
        print(f"{name:<{width}}  {t_fast * 1e3:>8.1f}ms  {t_slow * 1e3:>8.1f}ms  {t_slow / t_fast:>7.1f}x")


if __name__ == "__main__":
    main()
