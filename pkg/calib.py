"""Scratch calibration driver (not part of the package)."""
import argparse
import sys
import time

import numpy as np

from bonn.config import TrainConfig, resolve
from bonn.envs import make_env
from bonn.harness import build_policy
from bonn.trainer import train, evaluate

ap = argparse.ArgumentParser()
ap.add_argument("--env", default="cartpole")
ap.add_argument("--obs-mode", default="blind")
ap.add_argument("--k", type=int, default=2)
ap.add_argument("--lam", type=float, default=0.5)
ap.add_argument("--eps", type=float, default=0.0)
ap.add_argument("--lr", type=float, default=3e-3)
ap.add_argument("--iters", type=int, default=1000)
ap.add_argument("--batch", type=int, default=16)
ap.add_argument("--seed", type=int, default=0)
ap.add_argument("--k-options", type=int, default=0)
ap.add_argument("--n-y", type=int, default=-1)
ap.add_argument("--n-gru", type=int, default=-1)
ap.add_argument("--gamma", type=float, default=0.99)
ap.add_argument("--entropy", type=float, default=0.0)
ap.add_argument("--acq-bias", type=float, default=2.0)
ap.add_argument("--force-full-obs", action="store_true")
ap.add_argument("--every", type=int, default=100)
ap.add_argument("--tag", default="")
a = ap.parse_args()

cfg = resolve(TrainConfig(env=a.env, obs_mode=a.obs_mode, k=a.k, lam=a.lam,
                          epsilon=a.eps, lr=a.lr, iterations=a.iters,
                          batch=a.batch, seed=a.seed, k_options=a.k_options,
                          n_y=a.n_y, n_gru=a.n_gru, gamma=a.gamma,
                          entropy_coef=a.entropy, acq_bias=a.acq_bias,
                          force_full_obs=a.force_full_obs))
params = build_policy(cfg)
t0 = time.time()
for r in train(cfg, params, lambda: make_env(cfg)):
    if r.iteration % a.every == 0 or r.iteration == cfg.iterations - 1:
        print(f"[{a.tag}] it {r.iteration:5d} R {r.mean_return:8.2f} obs {r.obs_fraction:.3f} "
              f"len {r.mean_length:6.1f} {time.time()-t0:7.1f}s", flush=True)
res = evaluate(params, lambda: make_env(cfg), 100, seed=cfg.seed,
               max_steps=cfg.max_steps, force_full_obs=cfg.force_full_obs)
print(f"[{a.tag}] EVAL R {res.mean_return:.2f} obs {res.obs_fraction:.4f} "
      f"len {res.mean_length:.1f} success {res.success_rate:.2f} total {time.time()-t0:.0f}s",
      flush=True)
