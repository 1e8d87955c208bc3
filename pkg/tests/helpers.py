"""Independent oracle implementations used to verify the package.

Everything here is deliberately naive (scalar loops, exhaustive enumeration,
finite differences) and shares no code with the library internals beyond the
public parameter containers.
"""

import math

import numpy as np

from hashlearn.network import LINEAR, SIGMOID, NetworkParams


def random_params(sizes, acts, mode, rng, scale=0.5):
    """Gaussian test network; the library itself never initializes randomly."""
    ws = [rng.standard_normal((sizes[i + 1], sizes[i])) * scale for i in range(len(sizes) - 1)]
    cs = [rng.standard_normal(sizes[i + 1]) * 0.1 for i in range(len(sizes) - 1)]
    return NetworkParams(list(sizes), ws, cs, list(acts), mode)


def naive_forward_column(params, x_col, upto):
    """Scalar-loop forward pass for one sample; returns activations per layer."""
    h = [float(v) for v in x_col]
    outs = [list(h)]
    for li in range(upto - 1):
        w = params.weights[li]
        c = params.biases[li]
        z = []
        for r in range(w.shape[0]):
            acc = float(c[r])
            for col in range(w.shape[1]):
                acc += float(w[r, col]) * h[col]
            z.append(acc)
        if params.activations[li] == SIGMOID:
            h = [1.0 / (1.0 + math.exp(-v)) for v in z]
        elif params.activations[li] == LINEAR:
            h = list(z)
        else:
            raise AssertionError("unknown activation in oracle")
        outs.append(list(h))
    return outs


def naive_frobenius_sq(a):
    total = 0.0
    for row in np.atleast_2d(np.asarray(a, dtype=np.float64)):
        for v in row:
            total += float(v) * float(v)
    return total


def naive_unsup_loss(params, x, b, lam1, lam2, lam3, lam4):
    """Scalar-loop version of the reconstruction objective."""
    d, m = x.shape
    n = len(params.layer_sizes)
    code_len = b.shape[0]
    h_cols = [naive_forward_column(params, x[:, j], n - 1)[-1] for j in range(m)]
    h = np.array(h_cols).T
    w_dec = params.weights[-1]
    c_dec = params.biases[-1]
    recon = 0.0
    for j in range(m):
        for r in range(d):
            pred = float(c_dec[r])
            for k in range(code_len):
                pred += float(w_dec[r, k]) * float(b[k, j])
            recon += (float(x[r, j]) - pred) ** 2
    j_val = recon / (2.0 * m)
    j_val += (lam1 / 2.0) * sum(naive_frobenius_sq(w) for w in params.weights)
    j_val += (lam2 / (2.0 * m)) * naive_frobenius_sq(h - b)
    corr = h @ h.T / m - np.eye(code_len)
    j_val += (lam3 / 2.0) * naive_frobenius_sq(corr)
    rowsums = h.sum(axis=1)
    j_val += (lam4 / (2.0 * m)) * float(np.sum(rowsums ** 2))
    return j_val


def naive_sup_loss(params, x, b, s, lam1, lam2, lam3, lam4):
    """Scalar-loop version of the pairwise-label objective."""
    d, m = x.shape
    n = len(params.layer_sizes)
    code_len = b.shape[0]
    h_cols = [naive_forward_column(params, x[:, j], n)[-1] for j in range(m)]
    h = np.array(h_cols).T
    fit = 0.0
    for i in range(m):
        for j in range(m):
            dot = 0.0
            for k in range(code_len):
                dot += float(h[k, i]) * float(h[k, j])
            fit += (dot / code_len - float(s[i, j])) ** 2
    j_val = fit / (2.0 * m)
    j_val += (lam1 / 2.0) * sum(naive_frobenius_sq(w) for w in params.weights)
    j_val += (lam2 / (2.0 * m)) * naive_frobenius_sq(h - b)
    corr = h @ h.T / m - np.eye(code_len)
    j_val += (lam3 / 2.0) * naive_frobenius_sq(corr)
    rowsums = h.sum(axis=1)
    j_val += (lam4 / (2.0 * m)) * float(np.sum(rowsums ** 2))
    return j_val


def central_difference(fun, x0, h=1e-5):
    """Central finite-difference gradient of a scalar function of a vector."""
    fd = np.zeros_like(x0)
    for i in range(x0.size):
        xp = x0.copy()
        xp[i] += h
        xm = x0.copy()
        xm[i] -= h
        fd[i] = (fun(xp) - fun(xm)) / (2.0 * h)
    return fd


def max_rel_error(a, b, floor=1e-3):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    denom = np.maximum(np.maximum(np.abs(a), np.abs(b)), floor)
    return float(np.max(np.abs(a - b) / denom))


def unpack_codes(codes):
    """Sign matrix from packed codes, rebuilt bit by bit with plain ints."""
    out = np.zeros((codes.code_len, codes.count))
    for i in range(codes.count):
        row = codes.packed[i]
        for j in range(codes.code_len):
            bit = (int(row[j // 8]) >> (j % 8)) & 1
            out[j, i] = 1.0 if bit else -1.0
    return out


def naive_hamming(sign_a, sign_b):
    return int(sum(1 for u, v in zip(sign_a, sign_b) if u != v))


def brute_force_ap(db_signs, query_sign, gt_indices, top_k=None):
    """AP from a fully materialized (distance, index)-sorted list."""
    m = db_signs.shape[1]
    ranked = sorted(range(m), key=lambda i: (naive_hamming(db_signs[:, i], query_sign), i))
    if top_k is not None:
        ranked = ranked[:top_k]
    gt = set(int(v) for v in gt_indices)
    if not gt:
        return 0.0
    hits = 0
    total = 0.0
    for rank, idx in enumerate(ranked, start=1):
        if idx in gt:
            hits += 1
            total += hits / rank
    return total / len(gt)


def brute_force_precision(db_signs, query_sign, gt_indices, radius):
    m = db_signs.shape[1]
    retrieved = [i for i in range(m) if naive_hamming(db_signs[:, i], query_sign) <= radius]
    if not retrieved:
        return 0.0
    gt = set(int(v) for v in gt_indices)
    return len([i for i in retrieved if i in gt]) / len(retrieved)
