"""One-step two-armed bandit, a diagnostic env for the learner.

Arm 0 pays 1, arm 1 pays 0; episodes last a single step.  Not exposed
through the CLI; used by tests and benchmarks to check that the
surrogate gradient moves action probabilities the right way.
"""

import numpy as np

from .base import DualObservation, Env, one_hot


class TwoArmedBandit(Env):
    n_actions = 2
    x_dim = 2
    y_dim = 1
    max_steps = 1

    def __init__(self, epsilon: float = 0.0, max_steps=None):
        super().__init__(epsilon, max_steps)
        self._done_flag = False
        self._won = False

    def reset(self, rng) -> DualObservation:
        self._rng = rng
        self.step_count = 0
        self._last_action = None
        self._done_flag = False
        self._won = False
        return self.observe()

    def observe(self) -> DualObservation:
        return DualObservation(x=one_hot(self._last_action, 2),
                               y=np.zeros(1),
                               done=self._done_flag)

    def step(self, action: int):
        self._check_action(action)
        self._last_action = action
        reward = 1.0 if action == 0 else 0.0
        self._won = action == 0
        self.step_count += 1
        self._done_flag = True
        obs = self.observe()
        obs.reward_prev = reward
        return obs, reward, True

    def success(self) -> bool:
        return self._won
