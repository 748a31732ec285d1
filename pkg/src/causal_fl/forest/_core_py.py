"""Pure-Python/numpy tree kernels.

Same algorithm, random stream and summation order as the compiled
``_core`` module; used when the extension is unavailable or when
``CAUSAL_FL_PURE=1`` is set.
"""
from __future__ import annotations

import numpy as np

MASK = (1 << 64) - 1


class SplitMix64:
    __slots__ = ("state",)

    def __init__(self, seed: int):
        self.state = seed & MASK

    def next(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
        return z ^ (z >> 31)

    def bounded(self, k: int) -> int:
        return ((self.next() >> 32) * k) >> 32


def _seq_sum(a: np.ndarray) -> float:
    # left-to-right accumulation, matching the compiled loop
    return float(np.cumsum(a)[-1]) if len(a) else 0.0


def grow_tree(X, is_cat, n_levels, y, seed, mtry, min_node_size):
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n, p = X.shape
    max_levels = max([1] + [int(n_levels[j]) for j in range(p) if is_cat[j]])
    max_nodes = 2 * n + 1
    feature = np.full(max_nodes, -1, dtype=np.int32)
    threshold = np.zeros(max_nodes)
    left = np.full(max_nodes, -1, dtype=np.int32)
    right = np.full(max_nodes, -1, dtype=np.int32)
    value = np.zeros(max_nodes)
    catmask = np.zeros((max_nodes, max_levels), dtype=np.uint8)
    use_mtry = min(mtry, p)

    rng = SplitMix64(seed)
    idx = np.array([rng.bounded(n) for _ in range(n)], dtype=np.int64)
    n_nodes = 1
    stack = [(0, 0, n)]
    while stack:
        node, start, end = stack.pop()
        rows = idx[start:end]
        m = end - start
        ys = y[rows]
        s = _seq_sum(ys)
        value[node] = s / m
        if m <= min_node_size or np.all(ys == ys[0]):
            continue
        # draw features until mtry of them are non-constant in this node
        perm = list(range(p))
        chosen = []
        j = 0
        while j < p and len(chosen) < use_mtry:
            r = j + rng.bounded(p - j)
            perm[j], perm[r] = perm[r], perm[j]
            col = X[rows, perm[j]]
            if col.min() != col.max():
                chosen.append(perm[j])
            j += 1
        chosen.sort()

        best_gain, best_f, best_thr, best_left = -1.0, -1, 0.0, None
        for f in chosen:
            xs = X[rows, f]
            if is_cat[f]:
                L = int(n_levels[f])
                codes = xs.astype(np.int64)
                lsum = np.bincount(codes, weights=ys, minlength=L)
                lcnt = np.bincount(codes, minlength=L)
                present = np.nonzero(lcnt > 0)[0]
                if len(present) < 2:
                    continue
                means = lsum[present] / lcnt[present]
                order = present[np.lexsort((present, means))]
                cl = np.cumsum(lsum[order])[:-1]
                nl = np.cumsum(lcnt[order])[:-1]
                gains = cl * cl / nl + (s - cl) ** 2 / (m - nl)
                k = int(np.argmax(gains))
                if gains[k] > best_gain:
                    best_gain, best_f, best_thr = float(gains[k]), f, float(k)
                    best_left = order[: k + 1]
            else:
                order = np.argsort(xs, kind="stable")
                xo, yo = xs[order], ys[order]
                cl_all = np.cumsum(yo)[:-1]
                valid = np.nonzero(xo[:-1] < xo[1:])[0]
                if len(valid) == 0:
                    continue
                cl = cl_all[valid]
                nl = valid + 1
                gains = cl * cl / nl + (s - cl) ** 2 / (m - nl)
                k = int(np.argmax(gains))
                if gains[k] > best_gain:
                    i = int(valid[k])
                    thr = (xo[i] + xo[i + 1]) * 0.5
                    if not (xo[i] <= thr < xo[i + 1]):
                        thr = xo[i]
                    best_gain, best_f, best_thr, best_left = float(gains[k]), f, float(thr), None
        if best_f < 0:
            continue
        if is_cat[best_f]:
            catmask[node, best_left] = 1
            go_left = catmask[node, X[rows, best_f].astype(np.int64)] == 1
        else:
            go_left = X[rows, best_f] <= best_thr
        idx[start:end] = np.concatenate([rows[go_left], rows[~go_left]])
        mid = start + int(go_left.sum())
        feature[node] = best_f
        threshold[node] = best_thr
        left[node], right[node] = n_nodes, n_nodes + 1
        n_nodes += 2
        stack.append((int(right[node]), mid, end))
        stack.append((int(left[node]), start, mid))
    k = n_nodes
    return (feature[:k].copy(), threshold[:k].copy(), left[:k].copy(), right[:k].copy(),
            value[:k].copy(), catmask[:k].copy())


def predict_packed(feature, threshold, left, right, value, catmask, roots, is_cat, X):
    X = np.asarray(X, dtype=np.float64)
    n = X.shape[0]
    max_levels = catmask.shape[1]
    rows = np.arange(n)
    acc = np.zeros(n)
    for root in roots:
        node = np.full(n, int(root), dtype=np.int64)
        active = feature[node] >= 0
        while active.any():
            nd = node[active]
            f = feature[nd]
            x = X[rows[active], f]
            cat = is_cat[f].astype(bool)
            code = np.where(cat & (x >= 0), x, 0).astype(np.int64)
            code_ok = cat & (x >= 0) & (code < max_levels)
            in_left = np.zeros(len(nd), dtype=bool)
            in_left[code_ok] = catmask[nd[code_ok], code[code_ok]] == 1
            go_left = np.where(cat, in_left, x <= threshold[nd])
            node[active] = root + np.where(go_left, left[nd], right[nd])
            active = feature[node] >= 0
        # per-row sequential accumulation in tree order
        acc = acc + value[node]
    return acc / len(roots)
