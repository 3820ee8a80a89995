"""Exact combinators on ReLU networks: affine maps, composition, stacking."""
from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .._errors import InputError
from .network import ReluNetwork


def affine(W, b=None):
    """Network with no hidden layer computing ``W x + b``."""
    W = np.atleast_2d(np.asarray(W, float)) if not sp.issparse(W) else W
    b = np.zeros(W.shape[0]) if b is None else b
    return ReluNetwork([(W, b)])


def identity(d, depth=0):
    """Exact identity on ``R^d`` with ``depth`` hidden layers of width ``2d``
    (``z = relu(z) - relu(-z)``)."""
    if depth == 0:
        return affine(sp.identity(d, format="csr"))
    I = sp.identity(d, format="csr")
    up = sp.vstack([I, -I]).tocsr()
    down = sp.hstack([I, -I]).tocsr()
    pair = sp.vstack([sp.hstack([I, -I]), sp.hstack([-I, I])]).tocsr()
    layers = [(up, np.zeros(2 * d))]
    layers += [(pair, np.zeros(2 * d))] * (depth - 1)
    layers.append((down, np.zeros(d)))
    return ReluNetwork(layers)


def compose(outer: ReluNetwork, inner: ReluNetwork) -> ReluNetwork:
    """``outer(inner(x))``; the inner output affine map is merged into the
    outer first layer, so depths add."""
    if outer.n_in != inner.n_out:
        raise InputError(f"cannot compose: {outer.n_in} inputs vs {inner.n_out} outputs")
    W_o, b_o = outer.layers[0]
    W_i, b_i = inner.layers[-1]
    merged = ((W_o @ W_i).tocsr(), W_o @ b_i + b_o)
    return ReluNetwork(inner.layers[:-1] + [merged] + outer.layers[1:])


def chain(*nets):
    """``nets[-1](...nets[0](x))``, i.e. applied left to right."""
    out = nets[0]
    for n in nets[1:]:
        out = compose(n, out)
    return out


def deepen(net: ReluNetwork, depth: int) -> ReluNetwork:
    """Pad ``net`` to ``depth`` hidden layers with exact identity layers."""
    extra = depth - net.depth
    if extra < 0:
        raise InputError("cannot reduce depth")
    return net if extra == 0 else compose(identity(net.n_out, extra), net)


def stack(*nets) -> ReluNetwork:
    """Block-diagonal network on concatenated inputs and outputs."""
    depth = max(n.depth for n in nets)
    nets = [deepen(n, depth) for n in nets]
    layers = []
    for li in range(depth + 1):
        layers.append((sp.block_diag([n.layers[li][0] for n in nets], format="csr"),
                       np.concatenate([n.layers[li][1] for n in nets])))
    return ReluNetwork(layers)


def parallel(*nets) -> ReluNetwork:
    """All ``nets`` on the same input; outputs are concatenated."""
    d = nets[0].n_in
    if any(n.n_in != d for n in nets):
        raise InputError("parallel networks must share the input dimension")
    fan = sp.vstack([sp.identity(d, format="csr")] * len(nets)).tocsr()
    return compose(stack(*nets), affine(fan))


def select(n_in, idx):
    """Affine projection onto the coordinates ``idx``."""
    idx = np.atleast_1d(idx)
    W = sp.csr_matrix((np.ones(idx.size), (np.arange(idx.size), idx)), shape=(idx.size, n_in))
    return affine(W)


def positive_carry(d, depth):
    """Identity for inputs known to be non-negative: one ReLU per layer."""
    if depth == 0:
        return identity(d)
    I = sp.identity(d, format="csr")
    return ReluNetwork([(I, np.zeros(d))] * depth + [(I, np.zeros(d))])
