"""Synthetic labeled Gaussian clusters for experiments and tests."""

import numpy as np


def gaussian_clusters(n_dims, n_samples, n_clusters, seed, center_scale=4.0, spread=1.0):
    """(X, labels) with X (D, m): samples drawn around n_clusters random centers.

    Cluster sizes are as equal as the sample count allows; column order is
    shuffled so labels are not blocked.
    """
    if n_dims < 1 or n_samples < 1 or n_clusters < 1:
        raise ValueError("n_dims, n_samples, n_clusters must all be >= 1")
    if n_samples < n_clusters:
        raise ValueError("need at least one sample per cluster")
    rng = np.random.default_rng(seed)
    centers = rng.standard_normal((n_dims, n_clusters)) * center_scale
    counts = np.full(n_clusters, n_samples // n_clusters)
    counts[: n_samples % n_clusters] += 1
    labels = np.repeat(np.arange(n_clusters), counts)
    x = centers[:, labels] + rng.standard_normal((n_dims, n_samples)) * spread
    order = rng.permutation(n_samples)
    return x[:, order], labels[order].astype(np.int64)
