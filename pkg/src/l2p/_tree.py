"""Compiled CART kernels for binary (+1 / -1) classification with Gini splits.

Features are pre-encoded per column as integer codes into the column's sorted
unique values, so each node can scan candidate thresholds either through a
per-code histogram (most nodes) or an insertion sort of its own codes (nodes
with very few rows). Both paths enumerate the same candidates in the same
order. Bootstrap resamples are passed as per-row integer weights.
"""
import numpy as np
from numba import njit

LEAF = -1
# nodes with n * HIST_RATIO >= n_codes use the counting path, smaller ones sort
HIST_RATIO = 16


@njit(cache=True, nogil=True)
def _best_split_for_feature(codes, y, w, idx, start, end, f, n_codes, cnt_all, cnt_pos, keys, kw,
                            min_leaf, total_n, total_pos):
    """Best (score, left_code, right_code) for one feature; left_code = -1 if none.

    Counts are weighted by ``w`` (bootstrap multiplicities). score is the sum
    over both children of (pos**2 + neg**2) / size, which is maximised
    exactly where the weighted Gini impurity is minimised.
    """
    n_rows = end - start
    best = -np.inf
    best_lo = -1
    best_hi = -1
    nc = n_codes[f]
    if n_rows * HIST_RATIO >= nc:
        # counting pass; cnt_all / cnt_pos are all-zero on entry and on exit
        lo_c = nc
        hi_c = -1
        for t in range(start, end):
            s = idx[t]
            c = np.int64(codes[f, s])
            cnt_all[c] += w[s]
            cnt_pos[c] += w[s] * y[s]
            if c < lo_c:
                lo_c = c
            if c > hi_c:
                hi_c = c
        left_n = 0
        left_p = 0
        prev = -1
        for c in range(lo_c, hi_c + 1):
            if cnt_all[c] == 0:
                continue
            if prev >= 0:
                right_n = total_n - left_n
                if left_n >= min_leaf and right_n >= min_leaf:
                    right_p = total_pos - left_p
                    ln = left_n - left_p
                    rn = right_n - right_p
                    score = (left_p * left_p + ln * ln) / left_n + (right_p * right_p + rn * rn) / right_n
                    if score > best:
                        best = score
                        best_lo = prev
                        best_hi = c
            left_n += cnt_all[c]
            left_p += cnt_pos[c]
            cnt_all[c] = 0
            cnt_pos[c] = 0
            prev = c
    else:
        # few rows: insertion sort of (code, label) keys carrying their weights
        for t in range(n_rows):
            s = idx[start + t]
            key = np.int64(codes[f, s]) * 2 + y[s]
            wt = w[s]
            u = t
            while u > 0 and keys[u - 1] > key:
                keys[u] = keys[u - 1]
                kw[u] = kw[u - 1]
                u -= 1
            keys[u] = key
            kw[u] = wt
        left_n = 0
        left_p = 0
        prev = -1
        t = 0
        while t < n_rows:
            c = keys[t] >> 1
            if prev >= 0:
                right_n = total_n - left_n
                if left_n >= min_leaf and right_n >= min_leaf:
                    right_p = total_pos - left_p
                    ln = left_n - left_p
                    rn = right_n - right_p
                    score = (left_p * left_p + ln * ln) / left_n + (right_p * right_p + rn * rn) / right_n
                    if score > best:
                        best = score
                        best_lo = prev
                        best_hi = c
            while t < n_rows and (keys[t] >> 1) == c:
                left_n += kw[t]
                left_p += kw[t] * (keys[t] & 1)
                t += 1
            prev = c
    return best, best_lo, best_hi


@njit(cache=True, nogil=True)
def build_tree(codes, n_codes, values, y, weights, max_features, min_leaf, max_depth, seed):
    """Grow one tree on the weighted training rows.

    codes: (F, n) integer code of each feature value, column-major so a
    node's scan over one feature stays cache-resident; values: (F, U) sorted
    unique values per column; y: (n,) integers in {0, 1}; weights: (n,)
    non-negative integer multiplicities (a bootstrap resample as counts);
    max_depth < 0 means unlimited. Returns flat node arrays (feature,
    threshold, left, right, prob, n_samples) with node 0 as the root;
    n_samples and prob are weighted.
    """
    np.random.seed(seed)
    n_feat = codes.shape[0]
    idx = np.flatnonzero(weights > 0)
    m = idx.size
    cap = 2 * m + 1
    feature = np.full(cap, LEAF, dtype=np.int64)
    threshold = np.zeros(cap)
    left = np.full(cap, LEAF, dtype=np.int64)
    right = np.full(cap, LEAF, dtype=np.int64)
    prob = np.zeros(cap)
    n_samples = np.zeros(cap, dtype=np.int64)

    max_codes = 0
    for f in range(n_feat):
        if n_codes[f] > max_codes:
            max_codes = n_codes[f]
    cnt_all = np.zeros(max_codes, dtype=np.int64)
    cnt_pos = np.zeros(max_codes, dtype=np.int64)
    keys = np.zeros(max(1, max_codes // HIST_RATIO + 1), dtype=np.int64)
    kw = np.zeros(keys.size, dtype=np.int64)

    st_node = np.zeros(cap, dtype=np.int64)
    st_start = np.zeros(cap, dtype=np.int64)
    st_end = np.zeros(cap, dtype=np.int64)
    st_depth = np.zeros(cap, dtype=np.int64)
    st_node[0] = 0
    st_start[0] = 0
    st_end[0] = m
    st_depth[0] = 0
    top = 1
    n_nodes = 1

    while top > 0:
        top -= 1
        node = st_node[top]
        start = st_start[top]
        end = st_end[top]
        depth = st_depth[top]
        n = 0
        pos = 0
        for t in range(start, end):
            s = idx[t]
            n += weights[s]
            pos += weights[s] * y[s]
        prob[node] = pos / n
        n_samples[node] = n
        if pos == 0 or pos == n or n < 2 * min_leaf or depth == max_depth:
            continue

        best = -np.inf
        best_f = -1
        best_lo = -1
        best_hi = -1
        perm = np.random.permutation(n_feat)
        visited = 0
        for r in range(n_feat):
            if visited >= max_features:
                break
            f = perm[r]
            score, lo, hi = _best_split_for_feature(codes, y, weights, idx, start, end, f, n_codes,
                                                    cnt_all, cnt_pos, keys, kw, min_leaf, n, pos)
            if lo < 0:
                # constant within the node (or no split honours min_leaf): draw another
                continue
            visited += 1
            if score > best:
                best = score
                best_f = f
                best_lo = lo
                best_hi = hi
        if best_f < 0:
            continue

        thr = 0.5 * (values[best_f, best_lo] + values[best_f, best_hi])
        if thr >= values[best_f, best_hi]:
            thr = values[best_f, best_lo]
        i = start
        j = end - 1
        while i <= j:
            if codes[best_f, idx[i]] <= best_lo:
                i += 1
            else:
                tmp = idx[i]
                idx[i] = idx[j]
                idx[j] = tmp
                j -= 1
        feature[node] = best_f
        threshold[node] = thr
        lnode = n_nodes
        rnode = n_nodes + 1
        n_nodes += 2
        left[node] = lnode
        right[node] = rnode
        # push right first so the left subtree is expanded first
        st_node[top] = rnode
        st_start[top] = i
        st_end[top] = end
        st_depth[top] = depth + 1
        top += 1
        st_node[top] = lnode
        st_start[top] = start
        st_end[top] = i
        st_depth[top] = depth + 1
        top += 1

    return (feature[:n_nodes].copy(), threshold[:n_nodes].copy(), left[:n_nodes].copy(),
            right[:n_nodes].copy(), prob[:n_nodes].copy(), n_samples[:n_nodes].copy())


@njit(cache=True, nogil=True)
def apply_trees(X, roots, feature, threshold, left, right):
    """Leaf node index reached by every row in every tree: (n_rows, n_trees)."""
    n = X.shape[0]
    n_trees = roots.size
    out = np.empty((n, n_trees), dtype=np.int64)
    for r in range(n):
        for t in range(n_trees):
            node = roots[t]
            while feature[node] != LEAF:
                if X[r, feature[node]] <= threshold[node]:
                    node = left[node]
                else:
                    node = right[node]
            out[r, t] = node
    return out


@njit(cache=True, nogil=True)
def forest_prob(X, roots, feature, threshold, left, right, prob):
    n = X.shape[0]
    n_trees = roots.size
    out = np.zeros(n)
    for r in range(n):
        acc = 0.0
        for t in range(n_trees):
            node = roots[t]
            while feature[node] != LEAF:
                if X[r, feature[node]] <= threshold[node]:
                    node = left[node]
                else:
                    node = right[node]
            acc += prob[node]
        out[r] = acc / n_trees
    return out
