"""Run orchestration and file artifacts.

A training run writes, under its out_dir: the resolved config
(config.txt), per-iteration training stats (metrics.csv), final
weights (params.bin), a stochastic evaluation summary (eval.csv), the
evaluation episodes (traces.jsonl), and the option vectors captured at
acquisition steps (options.csv).  Everything except the elapsed_s
column is a pure function of the config, so reruns reproduce the
numeric fields byte for byte.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import replace

import numpy as np

from .config import ConfigError, TrainConfig, resolve, write_config
from .envs import make_env
from .nn import assign_params, load_params, save_params
from .pareto import ParetoPoint, pareto_front
from .policy import PolicyParams
from .render import render_trajectory_svg
from .trainer import episode_rngs, evaluate, train

METRICS_HEADER = ["iteration", "mean_return", "mean_aug_return",
                  "obs_fraction", "mean_length", "grad_norm", "elapsed_s"]
EVAL_HEADER = ["episodes", "mean_return", "obs_fraction", "mean_length",
               "success_rate", "seed"]
PARETO_HEADER = ["lambda", "obs_fraction", "mean_return", "seeds", "failed",
                 "non_dominated"]


def build_policy(cfg: TrainConfig) -> PolicyParams:
    """Policy sized for the configured env, seeded from the run seed."""
    probe = make_env(cfg)
    rng = np.random.default_rng(np.random.SeedSequence(entropy=(cfg.seed, 2)))
    try:
        return PolicyParams(probe.x_dim, probe.y_dim, probe.n_actions,
                            cfg.n_x, cfg.n_y, cfg.n_gru, rng,
                            n_options=cfg.k_options, acq_bias=cfg.acq_bias)
    except ValueError as e:
        raise ConfigError(str(e)) from e


def trace_to_json(trace, episode: int) -> dict:
    steps = []
    for t, s in enumerate(trace.steps):
        row = {"t": t, "sigma": s.sigma, "a": s.action, "r": s.reward}
        if s.env_annotation is not None:
            row["pos"] = [int(s.env_annotation[0]), int(s.env_annotation[1])]
        if s.option_index is not None:
            row["opt"] = s.option_index
        if s.option_vector_snapshot is not None:
            row["o"] = [float(v) for v in s.option_vector_snapshot]
        if s.goal_label is not None:
            row["goal"] = s.goal_label
        steps.append(row)
    return {"episode": episode, "return": trace.total_reward,
            "cost": trace.cost, "steps": steps}


def dump_option_latents(episodes: list[dict], n_gru: int) -> list[list]:
    """options.csv rows from the same records written to traces.jsonl."""
    rows = [["episode", "t", "goal_annotation"] + [f"o_{i + 1}" for i in range(n_gru)]]
    for ep in episodes:
        for s in ep["steps"]:
            if s.get("sigma") == 1 and "o" in s:
                rows.append([ep["episode"], s["t"], s.get("goal", -1)] + s["o"])
    return rows


def _write_csv(path, rows):
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        for row in rows:
            writer.writerow([str(v) for v in row])


def _write_eval_artifacts(out_dir: str, cfg: TrainConfig, params: PolicyParams):
    if cfg.eval_episodes > 0:
        result = evaluate(params, lambda: make_env(cfg), cfg.eval_episodes,
                          cfg.seed, max_steps=cfg.max_steps,
                          force_full_obs=cfg.force_full_obs,
                          option_recurrent=cfg.option_recurrent)
        episodes = [trace_to_json(tr, i) for i, tr in enumerate(result.traces)]
        eval_rows = [EVAL_HEADER,
                     [cfg.eval_episodes, result.mean_return, result.obs_fraction,
                      result.mean_length, result.success_rate, cfg.seed]]
    else:
        result = None
        episodes = []
        eval_rows = [EVAL_HEADER]
    _write_csv(os.path.join(out_dir, "eval.csv"), eval_rows)
    with open(os.path.join(out_dir, "traces.jsonl"), "w") as f:
        for ep in episodes:
            f.write(json.dumps(ep) + "\n")
    _write_csv(os.path.join(out_dir, "options.csv"),
               dump_option_latents(episodes, cfg.n_gru))
    return result


def run_train(cfg: TrainConfig):
    """Train per config, then evaluate; returns the EvalResult (or None)."""
    cfg = resolve(cfg)
    os.makedirs(cfg.out_dir, exist_ok=True)
    with open(os.path.join(cfg.out_dir, "config.txt"), "w") as f:
        f.write(write_config(cfg))
    params = build_policy(cfg)

    metrics_path = os.path.join(cfg.out_dir, "metrics.csv")
    with open(metrics_path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(METRICS_HEADER)
        try:
            for report in train(cfg, params, lambda: make_env(cfg)):
                writer.writerow([report.iteration,
                                 str(report.mean_return),
                                 str(report.mean_aug_return),
                                 str(report.obs_fraction),
                                 str(report.mean_length),
                                 str(report.grad_norm),
                                 str(report.elapsed_s)])
        finally:
            f.flush()
            save_params(os.path.join(cfg.out_dir, "params.bin"),
                        params.named_tensors())
    return _write_eval_artifacts(cfg.out_dir, cfg, params)


def load_run(out_dir: str) -> tuple[TrainConfig, PolicyParams]:
    """Rebuild the policy of a finished run from its artifacts."""
    from .config import parse_config
    cfg_path = os.path.join(out_dir, "config.txt")
    with open(cfg_path) as f:
        cfg = resolve(parse_config(f.read()))
    params = build_policy(cfg)
    assign_params(params.named_tensors(),
                  load_params(os.path.join(out_dir, "params.bin")))
    return cfg, params


def run_eval(out_dir: str, overrides: dict | None = None):
    cfg, params = load_run(out_dir)
    if overrides:
        cfg = resolve(replace(cfg, **overrides))
    return _write_eval_artifacts(out_dir, cfg, params)


def run_sweep(cfg: TrainConfig, lambdas, seeds):
    """Train every (lambda, seed) pair; aggregate per-lambda seed means."""
    if not lambdas or not seeds:
        raise ConfigError("sweep needs non-empty lambda and seed lists")
    base = resolve(cfg)
    os.makedirs(base.out_dir, exist_ok=True)
    rows = []
    points = []
    for lam in lambdas:
        returns = []
        costs = []
        failed = 0
        for seed in seeds:
            sub = replace(base, lam=lam, seed=seed,
                          out_dir=os.path.join(base.out_dir, f"lam_{lam}", f"seed_{seed}"))
            try:
                result = run_train(sub)
            except Exception as e:  # keep sweeping, flag the failure
                print(f"sweep run lambda={lam} seed={seed} failed: {e}")
                failed += 1
                continue
            if result is not None:
                returns.append(result.mean_return)
                costs.append(result.obs_fraction)
        if returns:
            point = ParetoPoint(lam=lam, cost=float(np.mean(costs)),
                                reward=float(np.mean(returns)), seeds=len(returns))
            points.append(point)
            rows.append([lam, point.cost, point.reward, point.seeds, failed])
        else:
            rows.append([lam, "nan", "nan", 0, failed])
    front = pareto_front(points)
    front_keys = {(p.lam, p.cost, p.reward) for p in front}
    table = [PARETO_HEADER]
    for row in rows:
        key = (row[0], row[1], row[2])
        table.append(row + [1 if key in front_keys else 0])
    _write_csv(os.path.join(base.out_dir, "pareto.csv"), table)
    return points, front


def render_episode(out_dir: str, episode: int = 0, out_path: str | None = None) -> str:
    """Re-derive the episode's grid from the run seed and draw it."""
    cfg, _ = load_run(out_dir)
    traces_path = os.path.join(out_dir, "traces.jsonl")
    record = None
    with open(traces_path) as f:
        for line in f:
            rec = json.loads(line)
            if rec["episode"] == episode:
                record = rec
                break
    if record is None:
        raise ValueError(f"episode {episode} not found in {traces_path}")
    env = make_env(cfg)
    _, rng_env = episode_rngs(cfg.seed, 1, 0, episode)
    env.reset(rng_env)
    goal = getattr(env, "goal", None)
    svg = render_trajectory_svg(record, env.walls(), goal=goal)
    if out_path is None:
        out_path = os.path.join(out_dir, f"traj_ep{episode}.svg")
    with open(out_path, "w") as f:
        f.write(svg)
    return out_path
