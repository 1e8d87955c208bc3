"""Pairwise-label hashing: similarity matrix, objective, gradients, code update.

The network's last layer doubles as the code layer here; codes follow its
activations directly (B = sgn(H)), and the objective asks the scaled code
inner products H.T @ H / L to reproduce a +1/-1 same-class matrix S.
"""

from dataclasses import dataclass

import numpy as np

from hashlearn.linalg import frobenius_sq
from hashlearn.network import activation_deriv, forward, sgn
from hashlearn.unsupervised import GradientSet, _backprop, _check_codes, _code_layer_penalties, _code_layer_pull, _weight_decay


@dataclass(frozen=True)
class SupHyper:
    """Penalty weights plus code length, training subset size, and per-class count."""

    lambda1: float
    lambda2: float
    lambda3: float
    lambda4: float
    code_len: int
    n_samples: int
    n_per_class: int = 0

    def validate(self):
        for name in ("lambda1", "lambda2", "lambda3", "lambda4"):
            v = getattr(self, name)
            if not np.isfinite(v) or v < 0:
                raise ValueError("%s must be finite and >= 0, got %r" % (name, v))
        if self.code_len < 1:
            raise ValueError("code_len must be >= 1")
        if self.n_samples < 1:
            raise ValueError("n_samples must be >= 1")


@dataclass(frozen=True)
class PairwiseLabels:
    """Same-class indicator matrix over a selected training subset."""

    matrix: np.ndarray         # (m, m) with +1 same class, -1 different
    sample_indices: np.ndarray  # positions of the subset in the original label array


def pairwise_matrix(labels):
    """+1/-1 same-class matrix of a label vector."""
    labels = np.asarray(labels)
    if labels.ndim != 1 or labels.size == 0:
        raise ValueError("labels must be a non-empty 1-d array")
    return np.where(labels[:, None] == labels[None, :], 1.0, -1.0)


def build_pairwise(labels, n_per_class, seed):
    """Pick n_per_class samples per class uniformly at random and build S.

    Selection is grouped by class in sorted class order; the RNG is seeded so
    the subset is reproducible.
    """
    labels = np.asarray(labels)
    if labels.ndim != 1 or labels.size == 0:
        raise ValueError("labels must be a non-empty 1-d array")
    if n_per_class < 1:
        raise ValueError("n_per_class must be >= 1")
    rng = np.random.default_rng(seed)
    picked = []
    for cls in np.unique(labels):
        idx = np.flatnonzero(labels == cls)
        if idx.size < n_per_class:
            raise ValueError("class %r has %d samples, need %d" % (cls, idx.size, n_per_class))
        picked.append(rng.choice(idx, size=n_per_class, replace=False))
    sel = np.concatenate(picked)
    return PairwiseLabels(pairwise_matrix(labels[sel]), sel)


def _check_similarity(s, m):
    s = np.asarray(s, dtype=np.float64)
    if s.shape != (m, m):
        raise ValueError("similarity matrix has shape %s, expected (%d, %d)" % (s.shape, m, m))
    if not np.all(np.abs(s) == 1.0):
        raise ValueError("similarity entries must be +1/-1")
    if not np.array_equal(s, s.T):
        raise ValueError("similarity matrix must be symmetric")
    return s


def loss(params, x, b, s, hyper):
    """Pairwise objective at fixed codes b and similarity s."""
    hyper.validate()
    x = np.asarray(x, dtype=np.float64)
    m = hyper.n_samples
    if x.shape[1] != m:
        raise ValueError("x has %d columns, expected %d" % (x.shape[1], m))
    if params.layer_sizes[-1] != hyper.code_len:
        raise ValueError("code layer has width %d, expected %d" % (params.layer_sizes[-1], hyper.code_len))
    b = _check_codes(b, hyper.code_len, m)
    s = _check_similarity(s, m)
    trace = forward(params, x)
    h = trace.H[-1]
    fit = h.T @ h / hyper.code_len - s
    j = frobenius_sq(fit) / (2.0 * m)
    j += _weight_decay(params, hyper)
    j += _code_layer_penalties(h, b, hyper)
    if not np.isfinite(j):
        raise ValueError("objective is non-finite")
    return j


def grad(params, x, b, s, hyper):
    """Gradient of loss() for every weight and bias block."""
    hyper.validate()
    x = np.asarray(x, dtype=np.float64)
    m = hyper.n_samples
    if x.shape[1] != m:
        raise ValueError("x has %d columns, expected %d" % (x.shape[1], m))
    if params.layer_sizes[-1] != hyper.code_len:
        raise ValueError("code layer has width %d, expected %d" % (params.layer_sizes[-1], hyper.code_len))
    b = _check_codes(b, hyper.code_len, m)
    s = _check_similarity(s, m)
    n = params.n_layers
    trace = forward(params, x)
    h = trace.H[-1]
    fit = h.T @ h / hyper.code_len - s
    # d/dH of the pairwise term, written exactly as the symmetrized product
    pull = (1.0 / (m * hyper.code_len)) * (h @ (fit + fit.T))
    pull += _code_layer_pull(h, b, hyper)
    delta = pull * activation_deriv(params.activations[n - 2], h)
    d_w, d_c = _backprop(params, trace, delta, n - 2)
    for i in range(n - 1):
        d_w[i] = d_w[i] + hyper.lambda1 * params.weights[i]
    return GradientSet(d_w, d_c)


def b_step(h_code):
    """Optimal codes at fixed activations: elementwise sign, ties to +1."""
    return sgn(h_code)
