"""Monte-Carlo policy-gradient learning on the cost-augmented return.

Each step's immediate reward is charged for acquisition,
r* = r - lambda * sigma, and discounted returns R*_t are built from
r*.  The surrogate whose gradient is the update direction is

    L = -sum_t [log P(a_t) + log P(sigma_t) (+ log P(i_t))] * (R*_t - b_t)

with per-time-index running-mean baselines b_t and the advantage
treated as a constant.  Batches of M episodes are averaged before one
Adam step.  BONN_WORKERS > 1 rolls episodes out on a thread pool;
reduction stays in episode-index order, so results do not depend on
scheduling.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .diffcore import Tape
from .nn import AdamState, NonFiniteGradientError, adam_step
from .policy import EpisodeTrace, PolicyParams, rollout


class TrainingDiverged(RuntimeError):
    """Non-finite quantities appeared; carries the last good report."""

    def __init__(self, message, last_report=None):
        super().__init__(message)
        self.last_report = last_report


@dataclass
class ReturnProfile:
    returns: np.ndarray      # R_t from raw rewards
    aug_returns: np.ndarray  # R*_t from r - lambda * sigma
    gamma: float
    lam: float


def compute_returns(trace: EpisodeTrace, gamma: float, lam: float) -> ReturnProfile:
    """Backward recurrence R_t = r_t + gamma R_{t+1}, with R_T = 0."""
    n = trace.length
    returns = np.zeros(n)
    aug = np.zeros(n)
    acc = 0.0
    acc_aug = 0.0
    for t in range(n - 1, -1, -1):
        s = trace.steps[t]
        acc = s.reward + gamma * acc
        acc_aug = (s.reward - lam * s.sigma) + gamma * acc_aug
        returns[t] = acc
        aug[t] = acc_aug
    return ReturnProfile(returns=returns, aug_returns=aug, gamma=gamma, lam=lam)


class BaselineState:
    """Per-time-index running mean of augmented returns.

    Fetch-then-update: an episode sees the baseline values from before
    it; a first visit to an index reads 0 and initializes the mean to
    the observed return.
    """

    def __init__(self, decay: float = 0.9):
        self.decay = decay
        self.values: list[float] = []
        self.counts: list[int] = []

    def update_and_fetch(self, profile: ReturnProfile) -> np.ndarray:
        n = profile.aug_returns.shape[0]
        if len(self.values) < n:
            grow = n - len(self.values)
            self.values.extend([0.0] * grow)
            self.counts.extend([0] * grow)
        out = np.empty(n)
        for t in range(n):
            out[t] = self.values[t]
            r = profile.aug_returns[t]
            if self.counts[t] == 0:
                self.values[t] = r
            else:
                self.values[t] = self.decay * self.values[t] + (1.0 - self.decay) * r
            self.counts[t] += 1
        return out


def episode_gradient(tape: Tape, trace: EpisodeTrace, profile: ReturnProfile,
                     baselines: np.ndarray, entropy_coef: float = 0.0) -> None:
    """Accumulate the surrogate's gradient into the parameter grads."""
    terms = []
    weights = []
    for t, s in enumerate(trace.steps):
        adv = profile.aug_returns[t] - baselines[t]
        terms.append(s.log_p_action)
        weights.append(-adv)
        if s.log_p_sigma is not None:
            terms.append(s.log_p_sigma)
            weights.append(-adv)
        if s.log_p_option is not None:
            terms.append(s.log_p_option)
            weights.append(-adv)
        if entropy_coef > 0.0:
            terms.append(tape.entropy(s.action_dist))
            weights.append(-entropy_coef)
            if s.sigma_dist is not None:
                terms.append(tape.entropy(s.sigma_dist))
                weights.append(-entropy_coef)
    surrogate = tape.weighted_sum(terms, weights)
    if not math.isfinite(surrogate.values[0]):
        raise TrainingDiverged(f"non-finite surrogate loss {surrogate.values[0]}")
    tape.backward(surrogate)


@dataclass
class TrainReport:
    iteration: int
    mean_return: float
    mean_aug_return: float
    obs_fraction: float
    mean_length: float
    grad_norm: float
    elapsed_s: float


@dataclass
class EvalResult:
    mean_return: float
    obs_fraction: float
    mean_length: float
    success_rate: float
    traces: list[EpisodeTrace] = field(default_factory=list)


def episode_rngs(seed: int, domain: int, iteration: int, episode: int):
    """Deterministic per-episode streams: (policy rng, env rng)."""
    ss = np.random.SeedSequence(entropy=(seed, domain, iteration, episode))
    pol, env = ss.spawn(2)
    return np.random.default_rng(pol), np.random.default_rng(env)


def worker_count() -> int:
    raw = os.environ.get("BONN_WORKERS", "1").strip()
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _sample_batch(cfg, params, env_factory, iteration):
    def one(ep):
        tape = Tape()
        rng_p, rng_e = episode_rngs(cfg.seed, 0, iteration, ep)
        trace = rollout(tape, params, env_factory(), rng_p, rng_e,
                        max_steps=cfg.max_steps,
                        force_full_obs=cfg.force_full_obs,
                        option_recurrent=cfg.option_recurrent)
        return tape, trace

    workers = worker_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(one, range(cfg.batch)))
    return [one(ep) for ep in range(cfg.batch)]


def train(cfg, params: PolicyParams, env_factory):
    """Yield one TrainReport per iteration; raises TrainingDiverged on blow-up."""
    adam = AdamState(params.named_tensors(), lr=cfg.lr, clip_norm=cfg.clip_norm)
    baseline = BaselineState()
    start = time.perf_counter()
    last_report = None
    for it in range(cfg.iterations):
        batch = _sample_batch(cfg, params, env_factory, it)
        total_r = 0.0
        total_aug = 0.0
        total_cost = 0
        total_len = 0
        try:
            for tape, trace in batch:
                profile = compute_returns(trace, cfg.gamma, cfg.lam)
                b = baseline.update_and_fetch(profile)
                episode_gradient(tape, trace, profile, b,
                                 entropy_coef=cfg.entropy_coef)
                total_r += trace.total_reward
                total_aug += trace.total_reward - cfg.lam * trace.cost
                total_cost += trace.cost
                total_len += trace.length
            inv_m = 1.0 / cfg.batch
            for _, t in adam.params:
                t.grad *= inv_m
            norm = adam_step(adam)
        except (TrainingDiverged, NonFiniteGradientError) as e:
            raise TrainingDiverged(str(e), last_report) from e
        last_report = TrainReport(
            iteration=it,
            mean_return=total_r / cfg.batch,
            mean_aug_return=total_aug / cfg.batch,
            obs_fraction=total_cost / max(total_len, 1),
            mean_length=total_len / cfg.batch,
            grad_norm=norm,
            elapsed_s=time.perf_counter() - start,
        )
        yield last_report


def evaluate(params: PolicyParams, env_factory, n_episodes: int, seed: int,
             max_steps: int | None = None, force_full_obs: bool = False,
             option_recurrent: bool = True) -> EvalResult:
    """Roll out the stochastic policy (same sampling as training)."""
    if n_episodes < 1:
        raise ValueError(f"need at least one evaluation episode, got {n_episodes}")
    traces = []
    total_r = 0.0
    total_cost = 0
    total_len = 0
    successes = 0
    for ep in range(n_episodes):
        env = env_factory()
        rng_p, rng_e = episode_rngs(seed, 1, 0, ep)
        trace = rollout(Tape(), params, env, rng_p, rng_e,
                        max_steps=max_steps, force_full_obs=force_full_obs,
                        option_recurrent=option_recurrent)
        traces.append(trace)
        total_r += trace.total_reward
        total_cost += trace.cost
        total_len += trace.length
        successes += int(env.success())
    return EvalResult(mean_return=total_r / n_episodes,
                      obs_fraction=total_cost / max(total_len, 1),
                      mean_length=total_len / n_episodes,
                      success_rate=successes / n_episodes,
                      traces=traces)
