import numpy as np


def random_margins(rng, n, j, both_signs=False):
    """Random +-1 matrix with per-column correctness probabilities.

    ``both_signs`` flips one entry in any single-sign column, which the
    smoothing-free fits need.
    """
    probs = rng.uniform(0.2, 0.8, j)
    m = np.where(rng.random((n, j)) < probs, 1, -1).astype(np.int8)
    if both_signs:
        for col in range(j):
            if (m[:, col] == m[0, col]).all():
                m[rng.integers(n), col] = -m[0, col]
    return m
