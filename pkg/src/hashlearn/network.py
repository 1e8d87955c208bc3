"""Feed-forward network that realizes the hash function.

Layer bookkeeping: a network with layer sizes [s1, ..., sn] has n - 1 weight
blocks; weights[i] has shape (s_{i+2}, s_{i+1}) in 1-based layer terms, i.e.
weights[i] @ (activations of layer i+1) feeds layer i+2.  activations[i] names
the nonlinearity applied at layer i+2.  Biases are 1-d and broadcast across
samples.
"""

from dataclasses import dataclass, field

import numpy as np

SIGMOID = "sigmoid"
LINEAR = "linear"
ACTIVATIONS = (SIGMOID, LINEAR)

UNSUPERVISED = "unsupervised"
SUPERVISED = "supervised"
MODES = (UNSUPERVISED, SUPERVISED)


def default_activations(n_layers, mode):
    """Sigmoid hidden layers; the code layer (and the decoder) stay linear."""
    if mode == UNSUPERVISED:
        n_sigmoid = n_layers - 3
    elif mode == SUPERVISED:
        n_sigmoid = n_layers - 2
    else:
        raise ValueError("unknown mode %r" % (mode,))
    if n_sigmoid < 0:
        raise ValueError("network too shallow for mode %r: %d layers" % (mode, n_layers))
    return [SIGMOID] * n_sigmoid + [LINEAR] * (n_layers - 1 - n_sigmoid)


@dataclass
class NetworkParams:
    """Weights, biases and activation tags of one hash network."""

    layer_sizes: list
    weights: list
    biases: list
    activations: list
    mode: str = UNSUPERVISED

    @property
    def n_layers(self):
        return len(self.layer_sizes)

    def validate(self):
        n = self.n_layers
        if n < 2:
            raise ValueError("need at least 2 layers, got %d" % n)
        if self.mode not in MODES:
            raise ValueError("unknown mode %r" % (self.mode,))
        if len(self.weights) != n - 1 or len(self.biases) != n - 1 or len(self.activations) != n - 1:
            raise ValueError("expected %d weight/bias/activation blocks" % (n - 1))
        for i in range(n - 1):
            want = (self.layer_sizes[i + 1], self.layer_sizes[i])
            if self.weights[i].shape != want:
                raise ValueError("weights[%d] has shape %s, expected %s" % (i, self.weights[i].shape, want))
            if self.biases[i].shape != (self.layer_sizes[i + 1],):
                raise ValueError("biases[%d] has shape %s, expected (%d,)" % (i, self.biases[i].shape, self.layer_sizes[i + 1]))
            if self.activations[i] not in ACTIVATIONS:
                raise ValueError("activations[%d] is %r, expected one of %s" % (i, self.activations[i], ACTIVATIONS))

    def copy(self):
        return NetworkParams(
            list(self.layer_sizes),
            [w.copy() for w in self.weights],
            [c.copy() for c in self.biases],
            list(self.activations),
            self.mode,
        )


@dataclass
class ForwardTrace:
    """Per-layer activations and pre-activations of one forward pass.

    H[0] is the input; H[i] is the output of layer i+1 (so len(H) == upto).
    Z[i] is the pre-activation that produced H[i+1].
    """

    H: list = field(default_factory=list)
    Z: list = field(default_factory=list)


def _sigmoid(z):
    # split by sign so exp never overflows
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def activate(kind, z):
    if kind == SIGMOID:
        return _sigmoid(z)
    if kind == LINEAR:
        return z
    raise ValueError("unknown activation %r" % (kind,))


def activation_deriv(kind, h):
    """Derivative of the activation expressed through its output h."""
    if kind == SIGMOID:
        return h * (1.0 - h)
    if kind == LINEAR:
        return np.ones_like(h)
    raise ValueError("unknown activation %r" % (kind,))


def forward(params, x, upto=None):
    """Run the network on (D, m) input up to the given 1-based layer index.

    Returns a ForwardTrace; trace.H[-1] is the requested layer's output.
    upto defaults to the full depth.
    """
    params.validate()
    x = np.asarray(x, dtype=np.float64)
    n = params.n_layers
    if upto is None:
        upto = n
    if not 1 <= upto <= n:
        raise ValueError("upto=%d out of range for %d layers" % (upto, n))
    if x.ndim != 2 or x.shape[0] != params.layer_sizes[0]:
        raise ValueError("input has shape %s, expected (%d, m)" % (x.shape, params.layer_sizes[0]))
    trace = ForwardTrace(H=[x], Z=[])
    h = x
    for i in range(upto - 1):
        z = params.weights[i] @ h + params.biases[i][:, None]
        h = activate(params.activations[i], z)
        if not np.all(np.isfinite(h)):
            raise ValueError("non-finite activations at layer %d" % (i + 2))
        trace.Z.append(z)
        trace.H.append(h)
    return trace


def sgn(a):
    """Elementwise sign with the tie broken upward: sgn(0) = +1."""
    a = np.asarray(a, dtype=np.float64)
    if not np.all(np.isfinite(a)):
        raise ValueError("sgn got non-finite input")
    return np.where(a >= 0, 1.0, -1.0)
