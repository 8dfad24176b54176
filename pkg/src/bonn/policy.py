"""Hierarchical budgeted policy: acquisition gate, option model, actor.

Per step the policy sees the cheap observation x, draws a Bernoulli
acquisition bit sigma from sigmoid(f_acq(h_prev, x)), and either

* sigma = 1: pays for the rich observation y, computes a fresh option
  state (a GRU over [x; y] in continuous mode, or a sampled row of a
  learned embedding table in discrete mode) and restarts the actor
  state from it, or
* sigma = 0: advances the actor state with its own GRU over x alone,

then samples the action from softmax(f_act(h)).  Stretches with
sigma = 0 behave as macro-actions conditioned on the last option.

Sampling consumes the per-episode stream in a fixed order (sigma,
then option index if any, then action) so traces replay exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .diffcore import Tape, Tensor, constant
from .nn import GruParams, LinearParams, gru_init, gru_step, gru_tensors, linear_init, linear_tensors


def sample_categorical(probs: np.ndarray, rng) -> int:
    """Inverse-CDF draw; cumulative walk in index order."""
    u = rng.random()
    acc = 0.0
    for i in range(probs.shape[0] - 1):
        acc += probs[i]
        if u < acc:
            return i
    return probs.shape[0] - 1


class PolicyParams:
    """All learned weights.

    Representation sizes of 0 mean the raw observation is fed through
    unchanged (no linear layer), as used when an observation is already
    a small code like a one-hot.  Discrete mode adds a K x n_gru option
    embedding table whose rows are scored against y by dot product, so
    it requires the y representation width to equal n_gru.
    """

    def __init__(self, x_dim: int, y_dim: int, n_actions: int,
                 n_x: int, n_y: int, n_gru: int, rng, n_options: int = 0,
                 acq_bias: float = 0.0):
        if n_gru < 1:
            raise ValueError(f"n_gru must be >= 1, got {n_gru}")
        if n_actions < 1:
            raise ValueError(f"need at least one action, got {n_actions}")
        self.x_dim = x_dim
        self.y_dim = y_dim
        self.n_actions = n_actions
        self.n_x = n_x
        self.n_y = n_y
        self.n_gru = n_gru
        self.n_options = n_options
        self.x_repr_dim = n_x if n_x > 0 else x_dim
        self.y_repr_dim = n_y if n_y > 0 else y_dim
        if n_options > 0 and self.y_repr_dim != n_gru:
            raise ValueError(
                f"discrete options score embeddings against y by dot product: "
                f"y representation width {self.y_repr_dim} must equal n_gru {n_gru}")

        # fixed draw order keeps equal seeds bitwise reproducible
        self.repr_x = linear_init(x_dim, n_x, rng) if n_x > 0 else None
        self.repr_y = linear_init(y_dim, n_y, rng) if n_y > 0 else None
        self.f_acq = linear_init(n_gru + self.x_repr_dim, 1, rng)
        # a positive starting bias makes the fresh policy look first and
        # economize later, instead of pruning acquisition before the
        # option pathway has earned anything
        self.f_acq.b.values[...] = acq_bias
        self.gru_opt = gru_init(self.x_repr_dim + self.y_repr_dim, n_gru, rng)
        self.gru_act = gru_init(self.x_repr_dim, n_gru, rng)
        self.f_act = linear_init(n_gru, n_actions, rng)
        if n_options > 0:
            bound = 1.0 / math.sqrt(n_gru)
            self.option_embeddings = Tensor(
                rng.uniform(-bound, bound, size=(n_options, n_gru)))
        else:
            self.option_embeddings = None

    @property
    def mode(self) -> str:
        return "discrete" if self.n_options > 0 else "continuous"

    def named_tensors(self):
        out = []
        if self.repr_x is not None:
            out += linear_tensors("repr_x", self.repr_x)
        if self.repr_y is not None:
            out += linear_tensors("repr_y", self.repr_y)
        out += linear_tensors("f_acq", self.f_acq)
        out += gru_tensors("gru_opt", self.gru_opt)
        out += gru_tensors("gru_act", self.gru_act)
        out += linear_tensors("f_act", self.f_act)
        if self.option_embeddings is not None:
            out.append(("option_embeddings", self.option_embeddings))
        return out


@dataclass
class PolicyState:
    o_last: Tensor
    h: Tensor
    t: int = 0


def initial_state(n_gru: int) -> PolicyState:
    return PolicyState(o_last=constant(np.zeros(n_gru), name="o_init"),
                       h=constant(np.zeros(n_gru), name="h_init"))


@dataclass
class StepTrace:
    sigma: int
    action: int
    log_p_action: Tensor
    log_p_sigma: Tensor | None = None
    option_index: int | None = None
    log_p_option: Tensor | None = None
    reward: float = 0.0
    acquired_y: bool = False
    option_vector_snapshot: np.ndarray | None = None
    env_annotation: tuple | None = None
    goal_label: int | None = None
    action_dist: Tensor | None = None
    sigma_dist: Tensor | None = None


@dataclass
class EpisodeTrace:
    steps: list[StepTrace] = field(default_factory=list)
    total_reward: float = 0.0

    @property
    def length(self) -> int:
        return len(self.steps)

    @property
    def cost(self) -> int:
        return sum(s.sigma for s in self.steps)


def represent_x(tape: Tape, p: PolicyParams, x_raw: Tensor) -> Tensor:
    if p.repr_x is None:
        return x_raw
    return tape.relu(tape.affine(p.repr_x.W, p.repr_x.b, x_raw))


def represent_y(tape: Tape, p: PolicyParams, y_raw: Tensor) -> Tensor:
    if p.repr_y is None:
        return y_raw
    return tape.relu(tape.affine(p.repr_y.W, p.repr_y.b, y_raw))


def acquisition_probability(tape: Tape, p: PolicyParams,
                            h_prev: Tensor, x_repr: Tensor) -> Tensor:
    return tape.sigmoid(tape.affine(p.f_acq.W, p.f_acq.b,
                                    tape.concat(h_prev, x_repr)))


def option_step(tape: Tape, p: PolicyParams, x_repr: Tensor, y_repr: Tensor,
                o_last: Tensor, recurrent: bool = True) -> Tensor:
    if y_repr is None:
        raise ValueError("option_step needs the acquired observation y")
    o_in = o_last if recurrent else constant(np.zeros(p.n_gru))
    return gru_step(tape, p.gru_opt, tape.concat(x_repr, y_repr), o_in)


def select_option_discrete(tape: Tape, p: PolicyParams, y_repr: Tensor, rng):
    """Sample an embedding index from softmax of dot-product scores."""
    if p.option_embeddings is None:
        raise ValueError("policy was built without discrete options")
    k = p.n_options
    scores = tape.affine(p.option_embeddings, constant(np.zeros(k)), y_repr)
    probs = tape.softmax(scores)
    idx = sample_categorical(probs.values, rng)
    return idx, probs


def actor_step(tape: Tape, p: PolicyParams, sigma: int, x_repr: Tensor,
               h_prev: Tensor, o_t: Tensor | None = None) -> Tensor:
    if sigma == 1:
        if o_t is None:
            raise ValueError("sigma = 1 step without an option state")
        return o_t  # shared node: gradients flow through the option model
    return gru_step(tape, p.gru_act, x_repr, h_prev)


def action_distribution(tape: Tape, p: PolicyParams, h: Tensor) -> Tensor:
    return tape.softmax(tape.affine(p.f_act.W, p.f_act.b, h))


def policy_step(tape: Tape, p: PolicyParams, state: PolicyState, obs, rng,
                force_full_obs: bool = False, option_recurrent: bool = True):
    """One inference step; returns (action, StepTrace, next PolicyState)."""
    x_repr = represent_x(tape, p, constant(obs.x, name="x"))

    log_p_sigma = None
    sigma_dist = None
    if force_full_obs:
        # the comparator that always looks: sigma is not a decision,
        # so it contributes no log-probability term
        sigma = 1
    else:
        p_acq = acquisition_probability(tape, p, state.h, x_repr)
        u = rng.random()
        sigma = 1 if u < p_acq.values[0] else 0
        sigma_dist = tape.affine(constant(np.array([[-1.0], [1.0]])),
                                 constant(np.array([1.0, 0.0])), p_acq)
        log_p_sigma = tape.pick_log_prob(sigma_dist, sigma)

    option_index = None
    log_p_option = None
    snapshot = None
    if sigma == 1:
        y_repr = represent_y(tape, p, constant(obs.y, name="y"))
        if p.mode == "discrete":
            option_index, probs = select_option_discrete(tape, p, y_repr, rng)
            log_p_option = tape.pick_log_prob(probs, option_index)
            o_t = tape.row(p.option_embeddings, option_index)
        else:
            o_t = option_step(tape, p, x_repr, y_repr, state.o_last,
                              recurrent=option_recurrent)
        h_t = actor_step(tape, p, 1, x_repr, state.h, o_t)
        o_last = o_t
        snapshot = o_t.values.copy()
    else:
        h_t = actor_step(tape, p, 0, x_repr, state.h)
        o_last = state.o_last

    dist = action_distribution(tape, p, h_t)
    action = sample_categorical(dist.values, rng)
    trace = StepTrace(sigma=sigma, action=action,
                      log_p_action=tape.pick_log_prob(dist, action),
                      log_p_sigma=log_p_sigma,
                      option_index=option_index, log_p_option=log_p_option,
                      acquired_y=sigma == 1,
                      option_vector_snapshot=snapshot,
                      action_dist=dist, sigma_dist=sigma_dist)
    return action, trace, PolicyState(o_last=o_last, h=h_t, t=state.t + 1)


def rollout(tape: Tape, p: PolicyParams, env, rng_policy, rng_env,
            max_steps: int | None = None, force_full_obs: bool = False,
            option_recurrent: bool = True) -> EpisodeTrace:
    """Play one episode; the env supplies the last-action one-hot inside x."""
    obs = env.reset(rng_env)
    cap = env.max_steps if max_steps is None else max_steps
    state = initial_state(p.n_gru)
    trace = EpisodeTrace()
    for _ in range(cap):
        action, st, state = policy_step(tape, p, state, obs, rng_policy,
                                        force_full_obs=force_full_obs,
                                        option_recurrent=option_recurrent)
        st.env_annotation = env.agent_position()
        if st.sigma == 1:
            st.goal_label = env.goal_label()
        obs, reward, done = env.step(action)
        st.reward = reward
        trace.steps.append(st)
        trace.total_reward += reward
        if done:
            break
    return trace
