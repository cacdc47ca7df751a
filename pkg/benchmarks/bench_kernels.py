"""Timing comparison of the numba and pure-numpy kernel backends.

The backend is fixed per process at import time, so this script re-executes
itself once per backend with QUADSHARE_BACKEND set and prints the per-call
timings side by side:

    python3 benchmarks/bench_kernels.py

Counts are sized so each worker finishes in a few seconds; pass --scale to
multiply them (e.g. --scale 10 for steadier numbers).
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import os
import subprocess
import sys
import time


def _time_per_call(fn, n: int) -> float:
    fn()  # warm any caches outside the timed window
    t0 = time.perf_counter()
    for _ in range(n):
        fn()
    return (time.perf_counter() - t0) / n


def run_worker(scale: float) -> dict:
    import numpy as np

    from quadshare import kernels
    from quadshare._backend import active_backend
    from quadshare.config import default_config
    from quadshare.experiment import run_experiment
    from quadshare.fuzzy import FuzzyEngine
    from quadshare.plant import QuadParams, QuadState, step_vector

    kernels.warmup()
    results: dict[str, float] = {}

    centers = np.linspace(-3.0, 3.0, 7)
    results["fuzzify"] = _time_per_call(
        lambda: kernels.fuzzify(0.37, centers), int(100_000 * scale)
    )

    engine = FuzzyEngine()
    results["gain_deltas (3 infers)"] = _time_per_call(
        lambda: engine.gain_deltas(0.8, -1.3), int(5_000 * scale)
    )

    params = QuadParams()
    pvec = params.as_vector()
    vec = QuadState.at_rest(z=5.0).as_vector()
    motors = np.full(4, params.hover_speed)
    results["rk4 step"] = _time_per_call(
        lambda: step_vector(vec, motors, pvec, 0.01), int(20_000 * scale)
    )

    cfg = dataclasses.replace(default_config(), duration=10.0)
    t0 = time.perf_counter()
    res = run_experiment(cfg, "auto", 0)
    results["closed-loop step"] = (time.perf_counter() - t0) / (len(res.rows) - 1)

    return {"backend": active_backend(), "results": results}


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--scale", type=float, default=1.0)
    parser.add_argument("--worker", action="store_true", help=argparse.SUPPRESS)
    args = parser.parse_args(argv)

    if args.worker:
        print(json.dumps(run_worker(args.scale)))
        return 0

    reports = {}
    for backend in ("numba", "numpy"):
        env = dict(os.environ, QUADSHARE_BACKEND=backend)
        proc = subprocess.run(
            [sys.executable, os.path.abspath(__file__), "--worker", "--scale", str(args.scale)],
            capture_output=True,
            text=True,
            env=env,
        )
        if proc.returncode != 0:
            print(proc.stderr, file=sys.stderr)
            return 1
        payload = json.loads(proc.stdout.strip().splitlines()[-1])
        assert payload["backend"] == backend, payload
        reports[backend] = payload["results"]

    names = list(reports["numba"])
    width = max(len(n) for n in names)
    print(f"{'kernel':<{width}}  {'numba':>12}  {'numpy':>12}  {'speedup':>8}")
    for name in names:
        a = reports["numba"][name]
        b = reports["numpy"][name]
        print(
            f"{name:<{width}}  {a * 1e6:>10.2f}us  {b * 1e6:>10.2f}us  {b / a:>7.1f}x"
        )
    return 0


if __name__ == "__main__":
    sys.exit(main())
