"""Shared environment interface: paired low/high observations.

Every environment exposes a cheap observation ``x`` on every step
(which always embeds a one-hot of the agent's previously *chosen*
action, all-zero at episode start) and a richer observation ``y`` that
the policy may or may not consume.  Action noise: with probability
``epsilon`` the executed action is redrawn uniformly; the one-hot in
``x`` still reports the chosen action, so under noise the agent cannot
infer the true transition from ``x`` alone.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class DualObservation:
    x: np.ndarray
    y: np.ndarray
    done: bool = False
    reward_prev: float = 0.0


def apply_stochasticity(action: int, epsilon: float, rng, n_actions: int) -> int:
    """With probability epsilon, replace the action by a uniform draw.

    epsilon = 0 consumes no randomness, so noise-free runs are
    bit-identical to an env without the wrapper.
    """
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError(f"epsilon {epsilon} outside [0, 1]")
    if epsilon == 0.0:
        return action
    if rng.random() < epsilon:
        return int(rng.integers(n_actions))
    return action


def one_hot(index, n: int) -> np.ndarray:
    v = np.zeros(n)
    if index is not None:
        v[index] = 1.0
    return v


class Env:
    """Base for the dual-observation environments."""

    n_actions: int = 0
    x_dim: int = 0
    y_dim: int = 0
    max_steps: int = 0

    def __init__(self, epsilon: float = 0.0, max_steps: int | None = None):
        if not 0.0 <= epsilon <= 1.0:
            raise ValueError(f"epsilon {epsilon} outside [0, 1]")
        self.epsilon = epsilon
        if max_steps is not None:
            self.max_steps = max_steps
        self._rng = None
        self._last_action = None
        self.step_count = 0

    def _check_action(self, action):
        if not 0 <= action < self.n_actions:
            raise ValueError(f"action {action} outside 0..{self.n_actions - 1}")

    def reset(self, rng) -> DualObservation:
        raise NotImplementedError

    def step(self, action: int):
        raise NotImplementedError

    def observe(self) -> DualObservation:
        """Pure re-read of the current observation pair."""
        raise NotImplementedError

    def success(self) -> bool:
        return False

    # rendering/analysis hooks; grid worlds override
    def agent_position(self):
        return None

    def goal_label(self) -> int:
        return -1

    def walls(self):
        return None
