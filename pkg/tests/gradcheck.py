"""Finite-difference oracle and random composite-graph builder.

The oracle stays independent of the tape: it only re-evaluates a
forward closure at perturbed parameter values.  Tolerance contract:
relative error <= 1e-4 against the central difference, falling back to
an absolute 1e-7 where the reference is below 1e-3.
"""

import numpy as np

from bonn.diffcore import Tape, Tensor, constant
from bonn.nn import GruParams, gru_tensors


def numeric_grad(forward, tensor, eps=1e-4):
    """Central finite differences of the scalar forward() w.r.t. one tensor."""
    grad = np.zeros_like(tensor.values)
    flat = tensor.values.ravel()
    gflat = grad.ravel()
    for i in range(flat.shape[0]):
        orig = flat[i]
        flat[i] = orig + eps
        up = forward().values[0]
        flat[i] = orig - eps
        down = forward().values[0]
        flat[i] = orig
        gflat[i] = (up - down) / (2.0 * eps)
    return grad


def assert_tensor_grads(forward, tensors, eps=1e-4, rel=1e-4, abs_floor=1e-7):
    """Run backward on forward()'s output and compare every tensor's grad
    against the finite-difference oracle."""
    for t in tensors:
        t.zero_grad()
    tape, loss = forward()
    tape.backward(loss)
    for t in tensors:
        reference = numeric_grad(lambda: forward()[1], t, eps=eps)
        err = np.abs(t.grad - reference)
        big = np.abs(reference) >= 1e-3
        if big.any():
            assert (err[big] / np.abs(reference)[big]).max() <= rel
        if (~big).any():
            assert err[~big].max() <= abs_floor


class GraphPlan:
    """A reproducible random computation plan over fixed parameters.

    Mixes affine, GRU, softmax, concat, and pick_log_prob with vector
    widths <= 8 and depth <= 4; forward() rebuilds the graph on a fresh
    tape from the current parameter values.
    """

    def __init__(self, rng, depth=None, with_gru=True):
        self.params = []          # (name, Tensor)
        self.steps = []
        self.rng = rng
        sizes = []

        def add_param(name, shape):
            t = Tensor(rng.uniform(-1.5, 1.5, size=shape))
            self.params.append((name, t))
            return len(self.params) - 1

        n_inputs = int(rng.integers(1, 3))
        for i in range(n_inputs):
            width = int(rng.integers(1, 9))
            add_param(f"in{i}", (width,))
            sizes.append(width)
            self.steps.append(("leaf", len(self.params) - 1))

        depth = int(rng.integers(1, 5)) if depth is None else depth
        ops = ["affine", "act", "concat", "softmax"] + (["gru"] if with_gru else [])
        for d in range(depth):
            op = ops[int(rng.integers(len(ops)))]
            src = int(rng.integers(len(sizes)))
            if op == "affine":
                m = int(rng.integers(1, 9))
                w = add_param(f"W{d}", (m, sizes[src]))
                b = add_param(f"b{d}", (m,))
                self.steps.append(("affine", w, b, src))
                sizes.append(m)
            elif op == "act":
                kind = ("sigmoid", "tanh", "relu")[int(rng.integers(3))]
                self.steps.append(("act", kind, src))
                sizes.append(sizes[src])
            elif op == "concat":
                other = int(rng.integers(len(sizes)))
                self.steps.append(("concat", src, other))
                sizes.append(sizes[src] + sizes[other])
            elif op == "softmax":
                self.steps.append(("softmax", src))
                sizes.append(sizes[src])
            else:  # gru
                h_src = int(rng.integers(len(sizes)))
                nh, nx = sizes[h_src], sizes[src]
                idx = [add_param(f"g{d}_{k}", (nh, nx)) for k in range(3)]
                idx += [add_param(f"g{d}_{k}", (nh, nh)) for k in range(3, 6)]
                idx += [add_param(f"g{d}_{k}", (nh,)) for k in range(6, 9)]
                self.steps.append(("gru", tuple(idx), src, h_src))
                sizes.append(nh)
        # scalar head: log of one softmax probability
        self.pick = int(rng.integers(sizes[-1]))
        self.sizes = sizes

    def forward(self):
        tape = Tape()
        vals = []
        for step in self.steps:
            if step[0] == "leaf":
                vals.append(self.params[step[1]][1])
            elif step[0] == "affine":
                _, w, b, src = step
                vals.append(tape.affine(self.params[w][1], self.params[b][1], vals[src]))
            elif step[0] == "act":
                _, kind, src = step
                vals.append(tape.activation(kind, vals[src]))
            elif step[0] == "concat":
                _, a, b = step
                vals.append(tape.concat(vals[a], vals[b]))
            elif step[0] == "softmax":
                _, src = step
                vals.append(tape.softmax(vals[src]))
            else:
                _, idx, src, h_src = step
                args = [self.params[i][1] for i in idx]
                vals.append(tape.gru(*args, vals[src], vals[h_src]))
        probs = tape.softmax(vals[-1])
        loss = tape.pick_log_prob(probs, self.pick)
        return tape, loss


def check_plan_gradients(plan, eps=1e-4, rel=1e-4, abs_floor=1e-7):
    """Backward pass on the plan vs finite differences; returns worst ratio."""
    for _, t in plan.params:
        t.zero_grad()
    tape, loss = plan.forward()
    tape.backward(loss)
    worst = 0.0
    for name, t in plan.params:
        reference = numeric_grad(lambda: plan.forward()[1], t, eps=eps)
        analytic = t.grad
        big = np.abs(reference) >= 1e-3
        rel_err = np.abs(analytic - reference)[big] / np.abs(reference)[big]
        abs_err = np.abs(analytic - reference)[~big]
        if big.any():
            worst = max(worst, float(rel_err.max()))
            assert rel_err.max() <= rel, (
                f"{name}: relative gradient error {rel_err.max():.3e}")
        if (~big).any():
            assert abs_err.max() <= abs_floor, (
                f"{name}: absolute gradient error {abs_err.max():.3e}")
    return worst
