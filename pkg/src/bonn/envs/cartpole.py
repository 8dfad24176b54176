"""Pole balancing on a cart, explicit-Euler dynamics.

Constants and integration follow the classic control formulation
(masses 1.0/0.1, half-pole 0.5 m, 10 N force, tau = 0.02 s, failure at
|x| > 2.4 m or |angle| > 12 degrees, 200-step cap).  Blind pairing:
x is the one-hot of the last chosen action, y the four state values.
"""

import math

import numpy as np

from .base import DualObservation, Env, apply_stochasticity, one_hot

GRAVITY = 9.8
MASS_CART = 1.0
MASS_POLE = 0.1
TOTAL_MASS = MASS_CART + MASS_POLE
HALF_POLE = 0.5
POLE_MASS_LENGTH = MASS_POLE * HALF_POLE
FORCE_MAG = 10.0
TAU = 0.02
THETA_LIMIT = 12.0 * 2.0 * math.pi / 360.0
X_LIMIT = 2.4


def euler_step(state, force):
    """One explicit-Euler update of (x, x_dot, theta, theta_dot)."""
    x, x_dot, theta, theta_dot = state
    cos_t = math.cos(theta)
    sin_t = math.sin(theta)
    temp = (force + POLE_MASS_LENGTH * theta_dot * theta_dot * sin_t) / TOTAL_MASS
    theta_acc = (GRAVITY * sin_t - cos_t * temp) / (
        HALF_POLE * (4.0 / 3.0 - MASS_POLE * cos_t * cos_t / TOTAL_MASS))
    x_acc = temp - POLE_MASS_LENGTH * theta_acc * cos_t / TOTAL_MASS
    return (x + TAU * x_dot,
            x_dot + TAU * x_acc,
            theta + TAU * theta_dot,
            theta_dot + TAU * theta_acc)


class CartPole(Env):
    """Actions: 0 = push left, 1 = push right.  Reward +1 per step."""

    n_actions = 2
    x_dim = 2
    y_dim = 4
    max_steps = 200

    def __init__(self, epsilon: float = 0.0, max_steps=None):
        super().__init__(epsilon, max_steps)
        self.state = (0.0, 0.0, 0.0, 0.0)
        self._failed = False

    def reset(self, rng) -> DualObservation:
        self._rng = rng
        self.state = tuple(rng.uniform(-0.05, 0.05, size=4))
        self.step_count = 0
        self._last_action = None
        self._failed = False
        return self.observe()

    def observe(self) -> DualObservation:
        return DualObservation(x=one_hot(self._last_action, self.n_actions),
                               y=np.array(self.state),
                               done=self._done())

    def _done(self) -> bool:
        return self._failed or self.step_count >= self.max_steps

    def step(self, action: int):
        self._check_action(action)
        self._last_action = action
        executed = apply_stochasticity(action, self.epsilon, self._rng, self.n_actions)
        force = FORCE_MAG if executed == 1 else -FORCE_MAG
        self.state = euler_step(self.state, force)
        self.step_count += 1
        x, _, theta, _ = self.state
        self._failed = abs(x) > X_LIMIT or abs(theta) > THETA_LIMIT
        reward = 1.0
        obs = self.observe()
        obs.reward_prev = reward
        return obs, reward, obs.done

    def success(self) -> bool:
        return self.step_count >= self.max_steps and not self._failed
