# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled tree-growing and prediction kernels.

Mirrors ``_core_py`` operation for operation (same random stream, same
floating-point summation order) so both backends grow identical trees.
"""
import numpy as np
cimport numpy as cnp
from libc.stdint cimport uint64_t, int32_t, uint8_t, int64_t
from libc.stdlib cimport malloc, free, qsort

cnp.import_array()


cdef inline uint64_t sm_next(uint64_t* state) noexcept nogil:
    cdef uint64_t z
    state[0] += <uint64_t>0x9E3779B97F4A7C15ULL
    z = state[0]
    z = (z ^ (z >> 30)) * <uint64_t>0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * <uint64_t>0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline uint64_t bounded(uint64_t* state, uint64_t k) noexcept nogil:
    return ((sm_next(state) >> 32) * k) >> 32


cdef struct Item:
    double x
    int32_t pos
    double y


cdef int cmp_item(const void* a, const void* b) noexcept nogil:
    cdef const Item* ia = <const Item*>a
    cdef const Item* ib = <const Item*>b
    if ia.x < ib.x:
        return -1
    if ia.x > ib.x:
        return 1
    return ia.pos - ib.pos


cdef struct Level:
    double mean
    int32_t code


cdef int cmp_level(const void* a, const void* b) noexcept nogil:
    cdef const Level* la = <const Level*>a
    cdef const Level* lb = <const Level*>b
    if la.mean < lb.mean:
        return -1
    if la.mean > lb.mean:
        return 1
    return la.code - lb.code


def grow_tree(const double[:, ::1] X, const uint8_t[::1] is_cat, const int32_t[::1] n_levels,
              const double[::1] y, uint64_t seed, int mtry, int min_node_size):
    cdef Py_ssize_t n = X.shape[0]
    cdef Py_ssize_t p = X.shape[1]
    cdef Py_ssize_t max_nodes = 2 * n + 1
    cdef int max_levels = 1
    cdef Py_ssize_t j, i, k
    for j in range(p):
        if is_cat[j] and n_levels[j] > max_levels:
            max_levels = n_levels[j]

    feature_a = np.full(max_nodes, -1, dtype=np.int32)
    threshold_a = np.zeros(max_nodes, dtype=np.float64)
    left_a = np.full(max_nodes, -1, dtype=np.int32)
    right_a = np.full(max_nodes, -1, dtype=np.int32)
    value_a = np.zeros(max_nodes, dtype=np.float64)
    catmask_a = np.zeros((max_nodes, max_levels), dtype=np.uint8)
    cdef int32_t[::1] feature = feature_a
    cdef double[::1] threshold = threshold_a
    cdef int32_t[::1] left = left_a
    cdef int32_t[::1] right = right_a
    cdef double[::1] value = value_a
    cdef uint8_t[:, ::1] catmask = catmask_a

    cdef uint64_t state = seed
    cdef int32_t* idx = <int32_t*>malloc(n * sizeof(int32_t))
    cdef int32_t* tmp = <int32_t*>malloc(n * sizeof(int32_t))
    cdef Item* items = <Item*>malloc(n * sizeof(Item))
    cdef int32_t* perm = <int32_t*>malloc((p + 1) * sizeof(int32_t))
    cdef int32_t* chosen = <int32_t*>malloc((p + 1) * sizeof(int32_t))
    cdef double* lsum = <double*>malloc(max_levels * sizeof(double))
    cdef int32_t* lcnt = <int32_t*>malloc(max_levels * sizeof(int32_t))
    cdef Level* lv = <Level*>malloc(max_levels * sizeof(Level))
    # explicit DFS stack of (node, start, end)
    cdef int32_t* st_node = <int32_t*>malloc(max_nodes * sizeof(int32_t))
    cdef int32_t* st_start = <int32_t*>malloc(max_nodes * sizeof(int32_t))
    cdef int32_t* st_end = <int32_t*>malloc(max_nodes * sizeof(int32_t))
    cdef Py_ssize_t sp = 0
    cdef int32_t n_nodes = 1
    cdef int32_t node, start, end, m, f, best_f, nl_i, nr_i, n_present, r, t, best_rank, code, mid
    cdef double s, cl, cr, gain, best_gain, best_thr, y0, thr, lo, hi
    cdef int n_chosen
    cdef bint pure
    cdef int use_mtry = mtry if mtry < p else p

    try:
        for i in range(n):
            idx[i] = <int32_t>bounded(&state, <uint64_t>n)
        st_node[0] = 0
        st_start[0] = 0
        st_end[0] = <int32_t>n
        sp = 1
        while sp > 0:
            sp -= 1
            node = st_node[sp]
            start = st_start[sp]
            end = st_end[sp]
            m = end - start
            s = 0.0
            for i in range(start, end):
                s += y[idx[i]]
            value[node] = s / m
            if m <= min_node_size:
                continue
            y0 = y[idx[start]]
            pure = True
            for i in range(start + 1, end):
                if y[idx[i]] != y0:
                    pure = False
                    break
            if pure:
                continue
            for j in range(p):
                perm[j] = <int32_t>j
            # draw features until mtry of them are non-constant in this node
            n_chosen = 0
            j = 0
            while j < p and n_chosen < use_mtry:
                r = <int32_t>(j + bounded(&state, <uint64_t>(p - j)))
                t = perm[j]
                perm[j] = perm[r]
                perm[r] = t
                f = perm[j]
                j += 1
                lo = X[idx[start], f]
                hi = lo
                for i in range(start + 1, end):
                    if X[idx[i], f] < lo:
                        lo = X[idx[i], f]
                    elif X[idx[i], f] > hi:
                        hi = X[idx[i], f]
                if lo == hi:
                    continue
                k = n_chosen
                while k > 0 and chosen[k - 1] > f:
                    chosen[k] = chosen[k - 1]
                    k -= 1
                chosen[k] = f
                n_chosen += 1

            best_gain = -1.0
            best_f = -1
            best_thr = 0.0
            best_rank = -1
            for j in range(n_chosen):
                f = chosen[j]
                if is_cat[f]:
                    for k in range(n_levels[f]):
                        lsum[k] = 0.0
                        lcnt[k] = 0
                    for i in range(start, end):
                        code = <int32_t>X[idx[i], f]
                        lsum[code] += y[idx[i]]
                        lcnt[code] += 1
                    n_present = 0
                    for k in range(n_levels[f]):
                        if lcnt[k] > 0:
                            lv[n_present].mean = lsum[k] / lcnt[k]
                            lv[n_present].code = <int32_t>k
                            n_present += 1
                    if n_present < 2:
                        continue
                    qsort(lv, n_present, sizeof(Level), cmp_level)
                    cl = 0.0
                    nl_i = 0
                    for k in range(n_present - 1):
                        cl += lsum[lv[k].code]
                        nl_i += lcnt[lv[k].code]
                        nr_i = m - nl_i
                        cr = s - cl
                        gain = cl * cl / nl_i + cr * cr / nr_i
                        if gain > best_gain:
                            best_gain = gain
                            best_f = f
                            best_rank = <int32_t>k
                            best_thr = <double>k
                    if best_f == f:
                        # remember the level order for this feature's best split
                        for k in range(max_levels):
                            catmask[node, k] = 0
                        for k in range(best_rank + 1):
                            catmask[node, lv[k].code] = 1
                else:
                    for i in range(start, end):
                        items[i - start].x = X[idx[i], f]
                        items[i - start].pos = <int32_t>(i - start)
                        items[i - start].y = y[idx[i]]
                    qsort(items, m, sizeof(Item), cmp_item)
                    cl = 0.0
                    for i in range(m - 1):
                        cl += items[i].y
                        if items[i].x < items[i + 1].x:
                            nl_i = <int32_t>(i + 1)
                            nr_i = m - nl_i
                            cr = s - cl
                            gain = cl * cl / nl_i + cr * cr / nr_i
                            if gain > best_gain:
                                best_gain = gain
                                best_f = f
                                thr = (items[i].x + items[i + 1].x) * 0.5
                                if not (thr >= items[i].x and thr < items[i + 1].x):
                                    thr = items[i].x
                                best_thr = thr
            if best_f < 0:
                continue
            if not is_cat[best_f]:
                for k in range(max_levels):
                    catmask[node, k] = 0
            # stable partition
            mid = start
            for i in range(start, end):
                if is_cat[best_f]:
                    if catmask[node, <int32_t>X[idx[i], best_f]]:
                        idx[mid] = idx[i]
                        mid += 1
                    else:
                        tmp[i - start - (mid - start)] = idx[i]
                else:
                    if X[idx[i], best_f] <= best_thr:
                        idx[mid] = idx[i]
                        mid += 1
                    else:
                        tmp[i - start - (mid - start)] = idx[i]
            for i in range(end - mid):
                idx[mid + i] = tmp[i]
            feature[node] = best_f
            threshold[node] = best_thr
            left[node] = n_nodes
            right[node] = n_nodes + 1
            n_nodes += 2
            st_node[sp] = right[node]
            st_start[sp] = mid
            st_end[sp] = end
            sp += 1
            st_node[sp] = left[node]
            st_start[sp] = start
            st_end[sp] = mid
            sp += 1
    finally:
        free(idx)
        free(tmp)
        free(items)
        free(perm)
        free(chosen)
        free(lsum)
        free(lcnt)
        free(lv)
        free(st_node)
        free(st_start)
        free(st_end)
    return (feature_a[:n_nodes].copy(), threshold_a[:n_nodes].copy(), left_a[:n_nodes].copy(),
            right_a[:n_nodes].copy(), value_a[:n_nodes].copy(), catmask_a[:n_nodes].copy())


def predict_packed(const int32_t[::1] feature, const double[::1] threshold,
                   const int32_t[::1] left, const int32_t[::1] right, const double[::1] value,
                   const uint8_t[:, ::1] catmask, const int64_t[::1] roots,
                   const uint8_t[::1] is_cat, const double[:, ::1] X):
    cdef Py_ssize_t n = X.shape[0]
    cdef Py_ssize_t n_trees = roots.shape[0]
    cdef Py_ssize_t max_levels = catmask.shape[1]
    out_a = np.zeros(n, dtype=np.float64)
    cdef double[::1] out = out_a
    cdef Py_ssize_t i, t
    cdef int64_t node
    cdef int32_t f
    cdef Py_ssize_t code
    cdef double acc, x
    for i in range(n):
        acc = 0.0
        for t in range(n_trees):
            node = roots[t]
            while feature[node] >= 0:
                f = feature[node]
                x = X[i, f]
                if is_cat[f]:
                    code = <Py_ssize_t>x
                    if x >= 0 and code < max_levels and catmask[node, code]:
                        node = roots[t] + left[node]
                    else:
                        node = roots[t] + right[node]
                elif x <= threshold[node]:
                    node = roots[t] + left[node]
                else:
                    node = roots[t] + right[node]
            acc += value[node]
        out[i] = acc / n_trees
    return out_a
