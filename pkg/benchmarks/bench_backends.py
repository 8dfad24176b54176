#!/usr/bin/env python3
"""Compare the numba kernel path against the pure-numpy fallback.

Two layers of measurement:

* micro: the individual hot kernels, called directly from both
  implementation modules in-process;
* end-to-end: a fixed training workload run in a subprocess with
  BONN_NUMBA=1 vs BONN_NUMBA=0, since the backend is chosen at import
  time.

Usage: python benchmarks/bench_backends.py [--iters 40]
"""

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from bonn import _kernels_numpy

try:
    from bonn import _kernels_numba
except ImportError:
    _kernels_numba = None

WORKLOAD = """
import time
import numpy as np
from bonn import BACKEND
from bonn.config import TrainConfig, resolve
from bonn.envs import make_env
from bonn.harness import build_policy
from bonn.trainer import train

cfg = resolve(TrainConfig(env="cartpole", force_full_obs=True, lam=0.0,
                          iterations={iters} + 1, batch=16, seed=0,
                          lr=3e-3, max_steps=150))
params = build_policy(cfg)
it = train(cfg, params, lambda: make_env(cfg))
next(it)  # exclude jit compilation from the timing
t0 = time.perf_counter()
steps = sum(r.mean_length * 16 for r in it)
dt = time.perf_counter() - t0
print(f"{{BACKEND}}: {{dt:.2f}}s  {{dt / steps * 1e6:.1f}} us/step")
"""


def bench_kernels(mod, label, repeats=20000):
    rng = np.random.default_rng(0)
    W = rng.uniform(-1, 1, (10, 14))
    b = rng.uniform(-1, 1, 10)
    x = rng.uniform(-1, 1, 14)
    g = rng.uniform(-1, 1, 10)
    gru_args = [rng.uniform(-0.5, 0.5, s) for s in
                [(10, 14)] * 3 + [(10, 10)] * 3 + [(10,)] * 3] + [x, rng.uniform(-1, 1, 10)]

    mod.affine_fwd(W, b, x)  # warm any jit
    mod.gru_fwd(*gru_args)
    out = {}

    t0 = time.perf_counter()
    for _ in range(repeats):
        mod.affine_fwd(W, b, x)
    out["affine_fwd"] = time.perf_counter() - t0

    aW, ab, ax = np.zeros_like(W), np.zeros_like(b), np.zeros_like(x)
    t0 = time.perf_counter()
    for _ in range(repeats):
        mod.affine_bwd(W, x, g, aW, ab, ax)
    out["affine_bwd"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    for _ in range(repeats):
        mod.gru_fwd(*gru_args)
    out["gru_fwd"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    for _ in range(repeats):
        mod.softmax_fwd(b)
    out["softmax_fwd"] = time.perf_counter() - t0

    print(f"  {label}:")
    for name, dt in out.items():
        print(f"    {name:12s} {dt / repeats * 1e6:8.2f} us/call")
    return out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--iters", type=int, default=40,
                    help="training iterations for the end-to-end comparison")
    args = ap.parse_args()

    print("kernel microbenchmarks:")
    np_times = bench_kernels(_kernels_numpy, "numpy")
    if _kernels_numba is not None:
        nb_times = bench_kernels(_kernels_numba, "numba")
        for k in np_times:
            print(f"    {k:12s} speedup x{np_times[k] / nb_times[k]:.1f}")
    else:
        print("  numba unavailable; skipping jitted kernels")

    print("\nend-to-end training workload:")
    code = WORKLOAD.format(iters=args.iters)
    for flag in ("1", "0"):
        env = dict(os.environ, BONN_NUMBA=flag)
        res = subprocess.run([sys.executable, "-c", code], env=env,
                             capture_output=True, text=True)
        sys.stdout.write("  " + (res.stdout or res.stderr))


if __name__ == "__main__":
    main()
