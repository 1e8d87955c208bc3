"""Reconstruction-driven hashing: objective, gradients, and the discrete code solver.

The continuous variables are the network weights and biases; the discrete
variable is the code matrix B in {-1, +1}^(L, m).  The objective couples a
linear decoder that reconstructs the input from B with penalties that pull
the code-layer activations H toward B, toward decorrelated bits, and toward
balanced bits.
"""

from dataclasses import dataclass

import numpy as np

from hashlearn.linalg import frobenius_sq
from hashlearn.network import activation_deriv, forward


@dataclass(frozen=True)
class UnsupHyper:
    """Penalty weights plus the code length and sample count they refer to."""

    lambda1: float
    lambda2: float
    lambda3: float
    lambda4: float
    code_len: int
    n_samples: int

    def validate(self):
        for name in ("lambda1", "lambda2", "lambda3", "lambda4"):
            v = getattr(self, name)
            if not np.isfinite(v) or v < 0:
                raise ValueError("%s must be finite and >= 0, got %r" % (name, v))
        if self.code_len < 1:
            raise ValueError("code_len must be >= 1")
        if self.n_samples < 1:
            raise ValueError("n_samples must be >= 1")


@dataclass
class GradientSet:
    """Gradients aligned with NetworkParams.weights / .biases."""

    d_weights: list
    d_biases: list


def _check_codes(b, code_len, n_samples):
    b = np.asarray(b, dtype=np.float64)
    if b.shape != (code_len, n_samples):
        raise ValueError("codes have shape %s, expected (%d, %d)" % (b.shape, code_len, n_samples))
    if not np.all(np.abs(b) == 1.0):
        raise ValueError("codes must be +1/-1 valued")
    return b


def _code_layer_pull(h, b, hyper):
    """Shared penalty gradient at the code layer: quantization, decorrelation, balance."""
    m = hyper.n_samples
    g = (hyper.lambda2 / m) * (h - b)
    corr = h @ h.T / m - np.eye(h.shape[0])
    g += (2.0 * hyper.lambda3 / m) * (corr @ h)
    g += (hyper.lambda4 / m) * h.sum(axis=1)[:, None]
    return g


def _code_layer_penalties(h, b, hyper):
    m = hyper.n_samples
    j = (hyper.lambda2 / (2.0 * m)) * frobenius_sq(h - b)
    j += (hyper.lambda3 / 2.0) * frobenius_sq(h @ h.T / m - np.eye(h.shape[0]))
    j += (hyper.lambda4 / (2.0 * m)) * float(np.sum(h.sum(axis=1) ** 2))
    return j


def _weight_decay(params, hyper):
    return (hyper.lambda1 / 2.0) * sum(frobenius_sq(w) for w in params.weights)


def loss(params, x, b, hyper):
    """Full objective at the given parameters and fixed codes."""
    hyper.validate()
    x = np.asarray(x, dtype=np.float64)
    m = hyper.n_samples
    if x.shape[1] != m:
        raise ValueError("x has %d columns, expected %d" % (x.shape[1], m))
    b = _check_codes(b, hyper.code_len, m)
    n = params.n_layers
    if params.layer_sizes[-2] != hyper.code_len:
        raise ValueError("code layer has width %d, expected %d" % (params.layer_sizes[-2], hyper.code_len))
    trace = forward(params, x, upto=n - 1)
    h = trace.H[-1]
    w_dec = params.weights[-1]
    c_dec = params.biases[-1]
    resid = x - w_dec @ b - c_dec[:, None]
    j = frobenius_sq(resid) / (2.0 * m)
    j += _weight_decay(params, hyper)
    j += _code_layer_penalties(h, b, hyper)
    if not np.isfinite(j):
        raise ValueError("objective is non-finite")
    return j


def _backprop(params, trace, delta, top):
    """Propagate delta (gradient at layer top+2's activations, already through
    the activation derivative) down to weight block 0."""
    d_w = [None] * (top + 1)
    d_c = [None] * (top + 1)
    for i in range(top, -1, -1):
        d_w[i] = delta @ trace.H[i].T
        d_c[i] = delta.sum(axis=1)
        if i > 0:
            deriv = activation_deriv(params.activations[i - 1], trace.H[i])
            delta = (params.weights[i].T @ delta) * deriv
    return d_w, d_c


def grad(params, x, b, hyper):
    """Gradient of loss() with respect to every weight and bias block."""
    hyper.validate()
    x = np.asarray(x, dtype=np.float64)
    m = hyper.n_samples
    b = _check_codes(b, hyper.code_len, m)
    n = params.n_layers
    if n < 3:
        raise ValueError("unsupervised networks need at least 3 layers")
    if params.layer_sizes[-2] != hyper.code_len:
        raise ValueError("code layer has width %d, expected %d" % (params.layer_sizes[-2], hyper.code_len))
    trace = forward(params, x, upto=n - 1)
    h = trace.H[-1]
    w_dec = params.weights[-1]
    c_dec = params.biases[-1]
    resid = x - w_dec @ b - c_dec[:, None]

    d_w_dec = (-1.0 / m) * (resid @ b.T) + hyper.lambda1 * w_dec
    d_c_dec = (-1.0 / m) * resid.sum(axis=1)

    # pull at the code layer (layer n-1), through its activation derivative
    delta = _code_layer_pull(h, b, hyper) * activation_deriv(params.activations[n - 3], h)
    d_w, d_c = _backprop(params, trace, delta, n - 3)
    for i in range(n - 2):
        d_w[i] = d_w[i] + hyper.lambda1 * params.weights[i]
    d_w.append(d_w_dec)
    d_c.append(d_c_dec)
    return GradientSet(d_w, d_c)


def b_step(params, x, h_code, b_init, hyper, max_sweeps=10, objective_trace=None):
    """Row-wise discrete descent on the codes with everything else fixed.

    Minimizes ||X - W B - c 1||_F^2 + lambda2 ||H - B||_F^2 over B in
    {-1, +1}, one code row at a time; each row update is globally optimal
    given the other rows.  Sweeps over rows until a full sweep changes
    nothing, capped at max_sweeps.  If objective_trace is a list, the
    objective after every row update is appended to it.
    """
    hyper.validate()
    if max_sweeps < 1:
        raise ValueError("max_sweeps must be >= 1")
    x = np.asarray(x, dtype=np.float64)
    m = hyper.n_samples
    code_len = hyper.code_len
    b = _check_codes(b_init, code_len, m).copy()
    h_code = np.asarray(h_code, dtype=np.float64)
    if h_code.shape != (code_len, m):
        raise ValueError("h_code has shape %s, expected (%d, %d)" % (h_code.shape, code_len, m))
    w = params.weights[-1]
    c = params.biases[-1]
    v = x - c[:, None]
    q = w.T @ v + hyper.lambda2 * h_code
    g = w.T @ w

    def objective(cur):
        return frobenius_sq(x - w @ cur - c[:, None]) + hyper.lambda2 * frobenius_sq(h_code - cur)

    for _sweep in range(max_sweeps):
        changed = False
        for k in range(code_len):
            arg = q[k] - (g[k] @ b - g[k, k] * b[k])
            row = np.where(arg >= 0, 1.0, -1.0)
            if not np.array_equal(row, b[k]):
                changed = True
                b[k] = row
            if objective_trace is not None:
                objective_trace.append(objective(b))
        if not changed:
            break
    return b
