#!/usr/bin/env python3
"""Compiled quadrature core vs the scipy-based fallback.

Times the scaled tail-integral kernel on workloads shaped like the detector
CDFs actually produce, then an end-to-end threshold solve per backend (in
subprocesses, since the backend is fixed at import).

Run from the repository root:

    python benchmarks/bench_kernels.py
"""

import os
import subprocess
import sys
import time

import numpy as np

from edsense import _py_core

try:
    from edsense import _ext_core
except ImportError:
    _ext_core = None

REL, ABS, SUBDIV = 1e-10, 1e-14, 200


def workloads():
    rng = np.random.default_rng(1)
    # six Rayleigh links, thresholds across the ROC: the hot production case
    scales = np.array([0.5, 0.3972, 0.3155, 0.2506, 0.1581, 0.5])
    roc = []
    for x in np.geomspace(0.3, 8.0, 12):
        for b in scales:
            for n in range(5):
                roc.append((1.0 - n, 0.5 / b, 5.0 * x / (2.0 * b)))
    mixed = [
        (float(rng.integers(-4, 6)), float(10.0 ** rng.uniform(-2, 1.5)),
         float(10.0 ** rng.uniform(-2, 2)))
        for _ in range(300)
    ]
    return {"roc-sweep": roc, "mixed-orders": mixed}


def time_batch(mod, cases, repeats=5):
    alphas = np.array([c[0] for c in cases])
    xs = np.array([c[1] for c in cases])
    bs = np.array([c[2] for c in cases])
    mod.eig_scaled_batch(alphas, xs, bs, REL, ABS, SUBDIV)  # warm up
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        mod.eig_scaled_batch(alphas, xs, bs, REL, ABS, SUBDIV)
        best = min(best, time.perf_counter() - t0)
    return best / len(cases)


def end_to_end(backend):
    code = (
        "import time, edsense\n"
        "from edsense.presets import fig2_presets\n"
        "from edsense.closed_form import solve_threshold, detection_probability\n"
        "scn = dict(fig2_presets((0.5,)))['p0.5']\n"
        "t0 = time.perf_counter()\n"
        "g = solve_threshold(scn, 0.1)\n"
        "pd = detection_probability(scn, g)\n"
        "print(f'{edsense.BACKEND} {time.perf_counter() - t0:.3f}')\n"
    )
    env = dict(os.environ, EDSENSE_BACKEND=backend)
    out = subprocess.run([sys.executable, "-c", code], env=env,
                         capture_output=True, text=True, check=True)
    return out.stdout.strip()


def main():
    mods = [("python", _py_core)]
    if _ext_core is not None:
        mods.insert(0, ("ext", _ext_core))
    else:
        print("compiled extension not built; benchmarking the fallback only")

    print(f"{'workload':<14} {'backend':<8} {'us/integral':>12}")
    per = {}
    for name, cases in workloads().items():
        for label, mod in mods:
            t = time_batch(mod, cases)
            per[(name, label)] = t
            print(f"{name:<14} {label:<8} {t * 1e6:>12.2f}")
        if len(mods) == 2:
            speedup = per[(name, 'python')] / per[(name, 'ext')]
            print(f"{name:<14} {'speedup':<8} {speedup:>11.1f}x")

    print("\nend-to-end threshold solve (multi-user preset, target pfa 0.1):")
    for label, _ in mods:
        print(f"  {end_to_end(label)} s")


if __name__ == "__main__":
    main()
