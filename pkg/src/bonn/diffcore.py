"""Reverse-mode automatic differentiation over small dense tensors.

Define-by-run: a `Tape` is built per episode, operations execute
eagerly and append a node, and `Tape.backward` propagates adjoints in
reverse append order.  Everything is float64.  Gradients accumulate
into `Tensor.grad` until explicitly zeroed, so several backward passes
(one per episode of a batch) sum naturally.
"""

from __future__ import annotations

import numpy as np

from . import backend as K


class ShapeMismatchError(ValueError):
    """Raised when operand shapes do not conform."""


class Tensor:
    """Dense float64 array with a same-shape gradient buffer.

    A tensor is either a leaf (parameter or constant) or the output of
    a tape operation.  The grad buffer is allocated on first touch;
    constants never have theirs read or written by backward.
    """

    __slots__ = ("values", "_grad", "const", "name", "node_id")

    def __init__(self, values, const: bool = False, name: str = ""):
        v = np.asarray(values, dtype=np.float64)
        if v.ndim == 0:
            v = v.reshape(1)
        self.values = v
        self._grad = None
        self.const = const
        self.name = name
        # id on the creating tape; leaves are registered per-tape instead
        self.node_id = None

    @property
    def grad(self):
        g = self._grad
        if g is None:
            g = np.zeros_like(self.values)
            self._grad = g
        return g

    @grad.setter
    def grad(self, value):
        self._grad = value

    @property
    def shape(self):
        return self.values.shape

    @property
    def size(self):
        return self.values.size

    def zero_grad(self):
        if self._grad is not None:
            self._grad[...] = 0.0

    def __repr__(self):
        tag = " const" if self.const else ""
        return f"Tensor({self.name or self.shape}{tag})"


def constant(values, name: str = "") -> Tensor:
    return Tensor(values, const=True, name=name)


def zero_grads(tensors):
    for t in tensors:
        t.zero_grad()


# node kinds
_AFFINE = 0
_SIGMOID = 1
_TANH = 2
_RELU = 3
_SOFTMAX = 4
_CONCAT = 5
_PICK_LOG = 6
_GRU = 7
_ROW = 8
_WSUM = 9
_ENTROPY = 10

_ACT_KINDS = {"sigmoid": _SIGMOID, "tanh": _TANH, "relu": _RELU}


class _Node:
    __slots__ = ("kind", "inputs", "out", "aux")

    def __init__(self, kind, inputs, out, aux=None):
        self.kind = kind
        self.inputs = inputs
        self.out = out
        self.aux = aux


class Tape:
    """Append-only record of one episode's differentiable operations.

    Confined to a single worker while being built; the parameter
    tensors it references may be shared read-only across tapes.
    """

    def __init__(self):
        self.nodes: list[_Node] = []
        self.tensors: list[Tensor] = []
        self._is_op_out: list[bool] = []
        self._ids: dict[int, int] = {}  # id(tensor) -> node id on this tape

    def _reg(self, t: Tensor) -> int:
        nid = self._ids.get(id(t))
        if nid is None:
            nid = len(self.tensors)
            self._ids[id(t)] = nid
            self.tensors.append(t)
            self._is_op_out.append(False)
        return nid

    def _out(self, values) -> Tensor:
        t = Tensor(values)
        t.node_id = len(self.tensors)
        self._ids[id(t)] = t.node_id
        self.tensors.append(t)
        self._is_op_out.append(True)
        return t

    # -- operations ---------------------------------------------------

    def affine(self, W: Tensor, b: Tensor, x: Tensor) -> Tensor:
        m, n = W.values.shape
        if b.values.shape != (m,) or x.values.shape != (n,):
            raise ShapeMismatchError(
                f"affine: W {W.values.shape}, b {b.values.shape}, x {x.values.shape}")
        ids = (self._reg(W), self._reg(b), self._reg(x))
        out = self._out(K.affine_fwd(W.values, b.values, x.values))
        self.nodes.append(_Node(_AFFINE, ids, out.node_id))
        return out

    def activation(self, kind: str, x: Tensor) -> Tensor:
        code = _ACT_KINDS.get(kind)
        if code is None:
            raise ValueError(f"unknown activation kind {kind!r}")
        xid = self._reg(x)
        if code == _SIGMOID:
            out = self._out(K.sigmoid_fwd(x.values))
        elif code == _TANH:
            out = self._out(K.tanh_fwd(x.values))
        else:
            out = self._out(K.relu_fwd(x.values))
        self.nodes.append(_Node(code, (xid,), out.node_id))
        return out

    def sigmoid(self, x: Tensor) -> Tensor:
        return self.activation("sigmoid", x)

    def tanh(self, x: Tensor) -> Tensor:
        return self.activation("tanh", x)

    def relu(self, x: Tensor) -> Tensor:
        return self.activation("relu", x)

    def softmax(self, x: Tensor) -> Tensor:
        if x.values.ndim != 1 or x.size < 1:
            raise ShapeMismatchError(f"softmax needs a non-empty vector, got {x.values.shape}")
        xid = self._reg(x)
        out = self._out(K.softmax_fwd(x.values))
        self.nodes.append(_Node(_SOFTMAX, (xid,), out.node_id))
        return out

    def concat(self, a: Tensor, b: Tensor) -> Tensor:
        if a.values.ndim != 1 or b.values.ndim != 1:
            raise ShapeMismatchError(
                f"concat needs vectors, got {a.values.shape} and {b.values.shape}")
        ids = (self._reg(a), self._reg(b))
        out = self._out(np.concatenate((a.values, b.values)))
        self.nodes.append(_Node(_CONCAT, ids, out.node_id, aux=a.size))
        return out

    def pick_log_prob(self, dist: Tensor, index: int) -> Tensor:
        if not 0 <= index < dist.size:
            raise IndexError(f"index {index} out of range for distribution of size {dist.size}")
        p = dist.values[index]
        if p <= 0.0:
            raise ValueError(f"log-probability of entry {index} with mass {p}: dead action")
        did = self._reg(dist)
        out = self._out(np.array([np.log(p)]))
        self.nodes.append(_Node(_PICK_LOG, (did,), out.node_id, aux=index))
        return out

    def gru(self, Wz, Wr, Wh, Uz, Ur, Uh, bz, br, bh, x: Tensor, h: Tensor) -> Tensor:
        nh = h.size
        nx = x.size
        for W in (Wz, Wr, Wh):
            if W.values.shape != (nh, nx):
                raise ShapeMismatchError(f"gru: input matrix {W.values.shape} vs ({nh}, {nx})")
        for U in (Uz, Ur, Uh):
            if U.values.shape != (nh, nh):
                raise ShapeMismatchError(f"gru: recurrent matrix {U.values.shape} vs ({nh}, {nh})")
        for b in (bz, br, bh):
            if b.values.shape != (nh,):
                raise ShapeMismatchError(f"gru: bias {b.values.shape} vs ({nh},)")
        parts = (Wz, Wr, Wh, Uz, Ur, Uh, bz, br, bh, x, h)
        ids = tuple(self._reg(t) for t in parts)
        hn, z, r, hbar, rh = K.gru_fwd(*(t.values for t in parts))
        out = self._out(hn)
        self.nodes.append(_Node(_GRU, ids, out.node_id, aux=(z, r, hbar, rh)))
        return out

    def row(self, matrix: Tensor, index: int) -> Tensor:
        if matrix.values.ndim != 2:
            raise ShapeMismatchError(f"row needs a matrix, got {matrix.values.shape}")
        if not 0 <= index < matrix.values.shape[0]:
            raise IndexError(f"row {index} out of range for {matrix.values.shape}")
        mid = self._reg(matrix)
        out = self._out(matrix.values[index].copy())
        self.nodes.append(_Node(_ROW, (mid,), out.node_id, aux=index))
        return out

    def weighted_sum(self, terms, weights) -> Tensor:
        """Scalar sum(w_i * t_i) over scalar tensors; weights are constants."""
        w = np.asarray(weights, dtype=np.float64)
        if len(terms) != w.size:
            raise ShapeMismatchError(f"weighted_sum: {len(terms)} terms vs {w.size} weights")
        total = 0.0
        ids = []
        for t in terms:
            if t.size != 1:
                raise ShapeMismatchError(f"weighted_sum term has shape {t.values.shape}")
            ids.append(self._reg(t))
        for wi, t in zip(w, terms):
            total += wi * t.values[0]
        out = self._out(np.array([total]))
        self.nodes.append(_Node(_WSUM, tuple(ids), out.node_id, aux=w))
        return out

    def entropy(self, dist: Tensor) -> Tensor:
        """Shannon entropy of a strictly positive probability vector."""
        p = dist.values
        if np.any(p <= 0.0):
            raise ValueError("entropy needs strictly positive probabilities")
        did = self._reg(dist)
        out = self._out(np.array([-float(np.dot(p, np.log(p)))]))
        self.nodes.append(_Node(_ENTROPY, (did,), out.node_id))
        return out

    # -- backward -----------------------------------------------------

    def backward(self, loss: Tensor) -> None:
        """Accumulate d(loss)/d(leaf) into the grads of this tape's
        non-constant leaf tensors (parameters and direct inputs).

        Adjoints are per-call scratch, so repeated calls add full
        gradients each time (two calls double, etc.).
        """
        if loss.size != 1:
            raise ShapeMismatchError(f"backward needs a scalar loss, got shape {loss.values.shape}")
        self._reg(loss)
        adj: list = [None] * len(self.tensors)
        adj[self._ids[id(loss)]] = np.ones(1)

        def get(nid):
            a = adj[nid]
            if a is None:
                a = np.zeros_like(self.tensors[nid].values)
                adj[nid] = a
            return a

        for node in reversed(self.nodes):
            g = adj[node.out]
            if g is None:
                continue
            kind = node.kind
            ins = node.inputs
            if kind == _AFFINE:
                W, _, x = (self.tensors[i] for i in ins)
                K.affine_bwd(W.values, x.values, g, get(ins[0]), get(ins[1]), get(ins[2]))
            elif kind == _SIGMOID:
                K.sigmoid_bwd(self.tensors[node.out].values, g, get(ins[0]))
            elif kind == _TANH:
                K.tanh_bwd(self.tensors[node.out].values, g, get(ins[0]))
            elif kind == _RELU:
                K.relu_bwd(self.tensors[ins[0]].values, g, get(ins[0]))
            elif kind == _SOFTMAX:
                K.softmax_bwd(self.tensors[node.out].values, g, get(ins[0]))
            elif kind == _CONCAT:
                n = node.aux
                a = get(ins[0])
                b = get(ins[1])
                a += g[:n]
                b += g[n:]
            elif kind == _PICK_LOG:
                dist = self.tensors[ins[0]]
                get(ins[0])[node.aux] += g[0] / dist.values[node.aux]
            elif kind == _GRU:
                z, r, hbar, rh = node.aux
                vals = [self.tensors[i].values for i in ins]
                adjs = [get(i) for i in ins]
                K.gru_bwd(vals[0], vals[1], vals[2], vals[3], vals[4], vals[5],
                          vals[9], vals[10], z, r, hbar, rh, g,
                          adjs[0], adjs[1], adjs[2], adjs[3], adjs[4], adjs[5],
                          adjs[6], adjs[7], adjs[8], adjs[9], adjs[10])
            elif kind == _ROW:
                get(ins[0])[node.aux] += g
            elif kind == _WSUM:
                w = node.aux
                for wi, nid in zip(w, ins):
                    get(nid)[0] += wi * g[0]
            elif kind == _ENTROPY:
                p = self.tensors[ins[0]].values
                get(ins[0])[:] += g[0] * (-(np.log(p) + 1.0))
            else:  # pragma: no cover
                raise RuntimeError(f"unknown node kind {kind}")

        for nid, a in enumerate(adj):
            if a is None or self._is_op_out[nid]:
                continue
            t = self.tensors[nid]
            if not t.const:
                t.grad += a


def backward(tape: Tape, loss: Tensor) -> None:
    tape.backward(loss)
