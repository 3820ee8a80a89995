"""Sparse feed-forward ReLU networks and their plain-text format.

A network with ``L`` affine layers has ``L - 1`` hidden (ReLU) layers and an
identity output.  ``size`` counts nonzero weights and biases.
"""
from __future__ import annotations

import os
import tempfile

import numpy as np
import scipy.sparse as sp

from .._errors import EvaluationError, InputError

HEADER = "relu-net v1"


class ReluNetwork:
    """Layered affine + ReLU computation graph.

    Parameters
    ----------
    layers : list of (W, b)
        ``W`` has shape ``(rows, cols)`` and may be dense or sparse; ``b``
        has length ``rows``.  Consecutive layers must chain.
    """

    def __init__(self, layers):
        if not layers:
            raise InputError("a network needs at least one layer")
        clean = []
        prev = None
        for W, b in layers:
            W = sp.csr_matrix(W, dtype=float)
            W.eliminate_zeros()
            W.sort_indices()
            b = np.asarray(b, dtype=float).ravel()
            if b.size != W.shape[0]:
                raise InputError("bias length must equal the layer's row count")
            if prev is not None and W.shape[1] != prev:
                raise InputError(f"layer expects {W.shape[1]} inputs, previous gives {prev}")
            if not (np.all(np.isfinite(W.data)) and np.all(np.isfinite(b))):
                raise InputError("network parameters must be finite")
            b.setflags(write=False)
            clean.append((W, b))
            prev = W.shape[0]
        self.layers = clean

    @property
    def n_in(self) -> int:
        return self.layers[0][0].shape[1]

    @property
    def n_out(self) -> int:
        return self.layers[-1][0].shape[0]

    @property
    def depth(self) -> int:
        """Number of hidden layers."""
        return len(self.layers) - 1

    @property
    def width(self) -> int:
        """Largest hidden layer (0 for a purely affine network)."""
        return max((W.shape[0] for W, _ in self.layers[:-1]), default=0)

    @property
    def size(self) -> int:
        """Nonzero weights plus nonzero biases."""
        return int(sum(W.nnz + np.count_nonzero(b) for W, b in self.layers))

    def __repr__(self):
        return (f"ReluNetwork(n_in={self.n_in}, n_out={self.n_out}, depth={self.depth}, "
                f"width={self.width}, size={self.size})")

    def __call__(self, x):
        return evaluate(self, x)

    def to_text(self) -> str:
        return dumps(self)

    def save(self, path):
        save(self, path)


def evaluate(net: ReluNetwork, x):
    """Forward pass; ``x`` has shape ``(n_in,)`` or ``(batch, n_in)``."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    z = np.atleast_2d(x)
    if z.shape[1] != net.n_in:
        raise InputError(f"network expects {net.n_in} inputs, got {z.shape[1]}")
    last = len(net.layers) - 1
    for i, (W, b) in enumerate(net.layers):
        z = (W @ z.T).T + b
        if i < last:
            np.maximum(z, 0.0, out=z)
        if not np.all(np.isfinite(z)):
            raise EvaluationError(f"non-finite activation in layer {i}")
    return z[0] if single else z


def dumps(net: ReluNetwork) -> str:
    """Text form: header, then per layer ``layer rows cols nnz``, ``i j w``
    lines and a ``b ...`` line, all floats in shortest round-trip form."""
    out = [f"{HEADER} {len(net.layers)}"]
    for W, b in net.layers:
        coo = W.tocoo()
        order = np.lexsort((coo.col, coo.row))
        out.append(f"layer {W.shape[0]} {W.shape[1]} {coo.nnz}")
        out.extend(f"{coo.row[t]} {coo.col[t]} {float(coo.data[t])!r}" for t in order)
        out.append(" ".join(["b"] + [repr(float(v)) for v in b]))
    return "\n".join(out) + "\n"


def loads(text: str) -> ReluNetwork:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    head = lines[0].split()
    if " ".join(head[:2]) != HEADER or len(head) != 3:
        raise InputError("not a relu-net v1 document")
    n_layers = int(head[2])
    pos = 1
    layers = []
    for _ in range(n_layers):
        tag, rows, cols, nnz = lines[pos].split()
        if tag != "layer":
            raise InputError(f"expected a layer record at line {pos + 1}")
        rows, cols, nnz = int(rows), int(cols), int(nnz)
        trip = [lines[pos + 1 + t].split() for t in range(nnz)]
        i = np.array([int(t[0]) for t in trip], dtype=int)
        j = np.array([int(t[1]) for t in trip], dtype=int)
        w = np.array([float(t[2]) for t in trip])
        pos += 1 + nnz
        bl = lines[pos].split()
        if bl[0] != "b" or len(bl) != rows + 1:
            raise InputError(f"malformed bias line at line {pos + 1}")
        b = np.array([float(v) for v in bl[1:]])
        pos += 1
        layers.append((sp.csr_matrix((w, (i, j)), shape=(rows, cols)), b))
    return ReluNetwork(layers)


def save(net: ReluNetwork, path):
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".relu-net-")
    with os.fdopen(fd, "w") as fh:
        fh.write(dumps(net))
    os.replace(tmp, path)


def load(path) -> ReluNetwork:
    with open(path) as fh:
        return loads(fh.read())
