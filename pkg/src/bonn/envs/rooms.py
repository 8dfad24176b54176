"""Grid of k x k rooms joined by centered doors.

The agent starts in the top-left corner cell; a goal is placed
uniformly at random inside some room each episode.  Moving costs -1,
reaching the goal adds +20 (so an n-step successful episode totals
20 - n).  Two observation pairings:

* blind: x is the one-hot of the last chosen action only; y packs the
  in-room agent position, the four door flags of the current room, and
  the goal (flag + in-room position, zeros when the goal is elsewhere).
* split: the in-room agent position moves into x (with the one-hot);
  y keeps the rest.
"""

import numpy as np

from .base import DualObservation, Env, apply_stochasticity, one_hot

# action order everywhere: up, down, left, right
DELTAS = ((-1, 0), (1, 0), (0, -1), (0, 1))

GOAL_BONUS = 20.0
STEP_COST = -1.0


def rooms_build(k: int, room_size: int) -> np.ndarray:
    """Wall bitmap for k x k rooms with one centered door per shared wall."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if room_size < 3 or room_size % 2 == 0:
        raise ValueError(f"room_size must be odd and >= 3, got {room_size}")
    s = room_size
    n = k * (s + 1) + 1
    walls = np.zeros((n, n), dtype=bool)
    walls[::s + 1, :] = True
    walls[:, ::s + 1] = True
    half = s // 2
    for i in range(k):
        for j in range(k):
            r0 = i * (s + 1) + 1
            c0 = j * (s + 1) + 1
            if j + 1 < k:  # door to the room on the right
                walls[r0 + half, c0 + s] = False
            if i + 1 < k:  # door to the room below
                walls[r0 + s, c0 + half] = False
    return walls


class RoomsWorld(Env):
    n_actions = 4

    def __init__(self, k: int = 2, room_size: int = 5, mode: str = "blind",
                 epsilon: float = 0.0, max_steps=None):
        if mode not in ("blind", "split"):
            raise ValueError(f"unknown observation mode {mode!r}")
        if max_steps is None:
            max_steps = 100 if k <= 2 else 200
        super().__init__(epsilon, max_steps)
        self.k = k
        self.room_size = room_size
        self.mode = mode
        self._walls = rooms_build(k, room_size)
        self.x_dim = 4 if mode == "blind" else 6
        self.y_dim = 9 if mode == "blind" else 7
        self.agent = (1, 1)
        self.goal = (1, 1)
        self._reached = False

    def _interior_cells(self):
        s1 = self.room_size + 1
        return [(r, c)
                for r in range(1, self._walls.shape[0] - 1) if r % s1 != 0
                for c in range(1, self._walls.shape[1] - 1) if c % s1 != 0]

    def reset(self, rng) -> DualObservation:
        self._rng = rng
        self.agent = (1, 1)
        cells = [c for c in self._interior_cells() if c != self.agent]
        self.goal = cells[int(rng.integers(len(cells)))]
        self.step_count = 0
        self._last_action = None
        self._reached = False
        return self.observe()

    # -- geometry helpers ----------------------------------------------

    def room_of(self, cell):
        s1 = self.room_size + 1
        return ((cell[0] - 1) // s1, (cell[1] - 1) // s1)

    def in_room(self, cell):
        """In-room coordinates; door cells clamp to the nearest edge."""
        s1 = self.room_size + 1
        r = min((cell[0] - 1) % s1, self.room_size - 1)
        c = min((cell[1] - 1) % s1, self.room_size - 1)
        return r, c

    def _door_flags(self, room):
        i, j = room
        return [float(i > 0), float(i < self.k - 1),
                float(j > 0), float(j < self.k - 1)]

    def _norm(self, rc):
        d = max(self.room_size - 1, 1)
        return [rc[0] / d, rc[1] / d]

    def _room_fields(self):
        room = self.room_of(self.agent)
        agent_rc = self._norm(self.in_room(self.agent))
        doors = self._door_flags(room)
        if self.room_of(self.goal) == room:
            goal = [1.0] + self._norm(self.in_room(self.goal))
        else:
            goal = [0.0, 0.0, 0.0]
        return agent_rc, doors, goal

    def observe(self) -> DualObservation:
        agent_rc, doors, goal = self._room_fields()
        last = one_hot(self._last_action, self.n_actions)
        if self.mode == "blind":
            x = last
            y = np.array(agent_rc + doors + goal)
        else:
            x = np.concatenate((agent_rc, last))
            y = np.array(doors + goal)
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

    def goal_label(self) -> int:
        """3x3 sub-grid index of the goal inside the agent's room, -1 if absent."""
        if self.room_of(self.goal) != self.room_of(self.agent):
            return -1
        r, c = self.in_room(self.goal)
        s = self.room_size
        return (min(2, r * 3 // s)) * 3 + min(2, c * 3 // s)

    def walls(self):
        return self._walls.copy()
