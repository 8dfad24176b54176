"""Randomly generated perfect mazes with a shortest-path oracle.

A fresh maze is carved per episode (depth-first backtracker on the
odd-coordinate cell lattice), so layouts cannot be memorized.  The
cheap observation is the 3x3 wall neighborhood plus the last-action
one-hot; the costly observation is the one-hot of the move a
breadth-first planner with full map access would take.  Rewards follow
the rooms scheme (-1 per move, +20 on the goal).
"""

from collections import deque

import numpy as np

from .base import DualObservation, Env, apply_stochasticity, one_hot

DELTAS = ((-1, 0), (1, 0), (0, -1), (0, 1))  # up, down, left, right

GOAL_BONUS = 20.0
STEP_COST = -1.0


def maze_generate(width: int, height: int, rng) -> np.ndarray:
    """Depth-first backtracker on odd cells; the open graph is a spanning tree."""
    if width < 5 or height < 5 or width % 2 == 0 or height % 2 == 0:
        raise ValueError(f"maze dims must be odd and >= 5, got {width}x{height}")
    walls = np.ones((height, width), dtype=bool)
    start = (1, 1)
    walls[start] = False
    stack = [start]
    while stack:
        r, c = stack[-1]
        candidates = []
        for dr, dc in DELTAS:
            nr, nc = r + 2 * dr, c + 2 * dc
            if 0 < nr < height and 0 < nc < width and walls[nr, nc]:
                candidates.append((nr, nc, r + dr, c + dc))
        if candidates:
            nr, nc, wr, wc = candidates[int(rng.integers(len(candidates)))]
            walls[wr, wc] = False
            walls[nr, nc] = False
            stack.append((nr, nc))
        else:
            stack.pop()
    return walls


def distance_field(walls: np.ndarray, goal) -> np.ndarray:
    """BFS distances (in moves) from every open cell to the goal; -1 unreachable."""
    dist = np.full(walls.shape, -1, dtype=np.int64)
    dist[goal] = 0
    queue = deque([goal])
    h, w = walls.shape
    while queue:
        r, c = queue.popleft()
        for dr, dc in DELTAS:
            nr, nc = r + dr, c + dc
            if 0 <= nr < h and 0 <= nc < w and not walls[nr, nc] and dist[nr, nc] < 0:
                dist[nr, nc] = dist[r, c] + 1
                queue.append((nr, nc))
    return dist


def bfs_optimal_action(walls: np.ndarray, start, goal) -> int:
    """First move of a shortest path; ties break up < down < left < right."""
    if start == goal:
        raise ValueError("planner queried at the goal")
    if walls[start] or walls[goal]:
        raise ValueError("planner endpoints must be open cells")
    dist = distance_field(walls, goal)
    if dist[start] < 0:
        raise ValueError("goal unreachable from start")
    h, w = walls.shape
    for a, (dr, dc) in enumerate(DELTAS):
        nr, nc = start[0] + dr, start[1] + dc
        if 0 <= nr < h and 0 <= nc < w and dist[nr, nc] == dist[start] - 1:
            return a
    raise AssertionError("no descending neighbor in a connected distance field")


class OracleMaze(Env):
    n_actions = 4
    x_dim = 13  # 3x3 wall bits + last-action one-hot
    y_dim = 4
    max_steps = 200

    def __init__(self, width: int = 9, height: int = 9,
                 epsilon: float = 0.0, max_steps=None):
        super().__init__(epsilon, max_steps)
        self.width = width
        self.height = height
        self._walls = None
        self._dist = None
        self.agent = (1, 1)
        self.goal = (1, 1)
        self._reached = False

    def reset(self, rng) -> DualObservation:
        self._rng = rng
        self._walls = maze_generate(self.width, self.height, rng)
        opens = [tuple(p) for p in np.argwhere(~self._walls)]
        self.agent = opens[int(rng.integers(len(opens)))]
        rest = [p for p in opens if p != self.agent]
        self.goal = rest[int(rng.integers(len(rest)))]
        self._dist = distance_field(self._walls, self.goal)
        self.step_count = 0
        self._last_action = None
        self._reached = False
        return self.observe()

    def _neighborhood(self):
        bits = []
        for dr in (-1, 0, 1):
            for dc in (-1, 0, 1):
                r, c = self.agent[0] + dr, self.agent[1] + dc
                inside = 0 <= r < self.height and 0 <= c < self.width
                bits.append(1.0 if (not inside or self._walls[r, c]) else 0.0)
        return bits

    def _oracle_action(self) -> int:
        for a, (dr, dc) in enumerate(DELTAS):
            nr, nc = self.agent[0] + dr, self.agent[1] + dc
            if (0 <= nr < self.height and 0 <= nc < self.width
                    and self._dist[nr, nc] == self._dist[self.agent] - 1):
                return a
        raise AssertionError("no descending neighbor in a connected distance field")

    def observe(self) -> DualObservation:
        x = np.concatenate((self._neighborhood(),
                            one_hot(self._last_action, self.n_actions)))
        if self.agent == self.goal:
            y = np.zeros(self.n_actions)
        else:
            y = one_hot(self._oracle_action(), self.n_actions)
        return DualObservation(x=x, y=y, done=self._done())

    def _done(self) -> bool:
        return self._reached or self.step_count >= self.max_steps

    def step(self, action: int):
        self._check_action(action)
        self._last_action = action
        executed = apply_stochasticity(action, self.epsilon, self._rng, self.n_actions)
        dr, dc = DELTAS[executed]
        target = (self.agent[0] + dr, self.agent[1] + dc)
        if not self._walls[target]:
            self.agent = target
        self.step_count += 1
        reward = STEP_COST
        if self.agent == self.goal:
            reward += GOAL_BONUS
            self._reached = True
        obs = self.observe()
        obs.reward_prev = reward
        return obs, reward, obs.done

    def success(self) -> bool:
        return self._reached

    def agent_position(self):
        return self.agent

    def walls(self):
        return self._walls.copy()
