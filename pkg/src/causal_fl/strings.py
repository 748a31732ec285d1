"""Clustering of string treatment values."""
from __future__ import annotations

from typing import List, Sequence

import numpy as np
from sklearn.cluster import DBSCAN


def osa_distance(a: str, b: str) -> int:
    """Optimal string alignment distance (edit distance with adjacent
    transpositions, no substring edited twice)."""
    n, m = len(a), len(b)
    d = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(n + 1):
        d[i][0] = i
    for j in range(m + 1):
        d[0][j] = j
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            cost = 0 if a[i - 1] == b[j - 1] else 1
            d[i][j] = min(d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + cost)
            if i > 1 and j > 1 and a[i - 1] == b[j - 2] and a[i - 2] == b[j - 1]:
                d[i][j] = min(d[i][j], d[i - 2][j - 2] + 1)
    return d[n][m]


def distance_matrix(values: Sequence[str]) -> np.ndarray:
    k = len(values)
    out = np.zeros((k, k))
    for i in range(k):
        for j in range(i + 1, k):
            out[i, j] = out[j, i] = osa_distance(values[i], values[j])
    return out


def knee_eps(dist: np.ndarray, min_pts: int) -> float:
    """Knee of the sorted k-nearest-neighbour distance curve; falls back to
    the median pairwise distance when the curve has no usable knee."""
    k = len(dist)
    upper = dist[np.triu_indices(k, 1)]
    fallback = float(np.median(upper)) if len(upper) else 0.0
    kth = min(min_pts, k) - 1
    if kth < 1:
        return fallback
    knn = np.sort(np.sort(dist, axis=1)[:, kth])
    if knn[-1] == knn[0]:
        return fallback if knn[0] == 0 else float(knn[0])
    x = np.linspace(0.0, 1.0, len(knn))
    yn = (knn - knn[0]) / (knn[-1] - knn[0])
    eps = float(knn[int(np.argmax(x - yn))])
    return eps if eps > 0 else fallback


def cluster_strings(values: Sequence[str], dim: int = 1) -> List[int]:
    """Cluster id per value; DBSCAN noise points become singleton clusters.

    Clustering runs on the distinct values weighted by multiplicity, so the
    result does not depend on the order of the input.
    """
    distinct = sorted(set(values))
    if len(distinct) == 1:
        return [0] * len(values)
    weights = np.array([sum(1 for v in values if v == d) for d in distinct], dtype=float)
    dist = distance_matrix(distinct)
    min_pts = 2 * max(1, dim)
    eps = knee_eps(dist, min_pts)
    labels = DBSCAN(eps=max(eps, 1e-9), min_samples=min_pts, metric="precomputed").fit(
        dist, sample_weight=weights).labels_
    next_id = int(labels.max()) + 1 if (labels >= 0).any() else 0
    final = []
    for lab in labels:
        if lab < 0:
            final.append(next_id)
            next_id += 1
        else:
            final.append(int(lab))
    lookup = dict(zip(distinct, final))
    return [lookup[v] for v in values]
