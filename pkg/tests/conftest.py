import numpy as np


def compositions(n):
    """All ordered block-size lists summing to n."""
    if n == 0:
        yield []
        return
    for first in range(1, n + 1):
        for rest in compositions(n - first):
            yield [first] + rest


def distinct_levels(values, tol=1e-9):
    """Cluster sorted values into distinct levels with multiplicities."""
    levels, counts = [], []
    for v in np.sort(np.asarray(values, dtype=float)):
        if levels and v - levels[-1] <= tol:
            counts[-1] += 1
        else:
            levels.append(float(v))
            counts.append(1)
    return levels, counts


def random_splitting(rng, n):
    """Uniformly sampled ordered composition of n."""
    parts = []
    left = n
    while left > 0:
        p = int(rng.integers(1, left + 1))
        parts.append(p)
        left -= p
    return parts
