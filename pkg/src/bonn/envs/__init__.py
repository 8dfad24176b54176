"""Dual-observation environments and the action-noise helper."""

from .base import DualObservation, Env, apply_stochasticity, one_hot
from .bandit import TwoArmedBandit
from .cartpole import CartPole
from .maze import OracleMaze, bfs_optimal_action, distance_field, maze_generate
from .rooms import RoomsWorld, rooms_build

__all__ = [
    "DualObservation", "Env", "apply_stochasticity", "one_hot",
    "CartPole", "RoomsWorld", "OracleMaze", "TwoArmedBandit",
    "rooms_build", "maze_generate", "bfs_optimal_action", "distance_field",
    "make_env",
]


def make_env(cfg) -> Env:
    """Fresh environment instance from a resolved training config."""
    if cfg.env == "cartpole":
        return CartPole(epsilon=cfg.epsilon, max_steps=cfg.max_steps)
    if cfg.env == "rooms":
        return RoomsWorld(k=cfg.k, room_size=cfg.room_size, mode=cfg.obs_mode,
                          epsilon=cfg.epsilon, max_steps=cfg.max_steps)
    if cfg.env == "oracle-maze":
        return OracleMaze(width=cfg.maze_width, height=cfg.maze_height,
                          epsilon=cfg.epsilon, max_steps=cfg.max_steps)
    raise ValueError(f"unknown env {cfg.env!r}")
