"""Hot numeric kernels: KNN batch prediction and CART split search.

Each kernel has a numba @njit implementation and a pure-numpy fallback with
bit-identical results. The backend is chosen per call from the
SCOREFUSE_BACKEND environment variable:

    SCOREFUSE_BACKEND=numba   force numba (error if unavailable)
    SCOREFUSE_BACKEND=numpy   force the numpy fallback
    unset / auto              numba when importable, else numpy

Both paths accumulate sums in the same order (sequential over features,
cumulative over sorted rows), so selections and tie-breaks agree exactly.
"""

from __future__ import annotations

import os
import threading

import numpy as np

try:
    import numba
    from numba import njit, prange

    # Pin the OpenMP layer up front; it handles the large parallel batches
    # and skips the noisy TBB version probe.
    numba.config.THREADING_LAYER = "omp"
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False
    prange = range

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        return wrap

# Parallel kernels are entered by one caller at a time; grid-level threads
# queue here instead of nesting OpenMP regions.
_KERNEL_LOCK = threading.Lock()


def backend_name() -> str:
    choice = os.environ.get("SCOREFUSE_BACKEND", "auto").strip().lower()
    if choice in ("", "auto"):
        return "numba" if HAVE_NUMBA else "numpy"
    if choice == "numba":
        if not HAVE_NUMBA:
            raise RuntimeError("SCOREFUSE_BACKEND=numba but numba is not importable")
        return "numba"
    if choice == "numpy":
        return "numpy"
    raise RuntimeError(f"SCOREFUSE_BACKEND={choice!r}: expected numba, numpy or auto")


# ---------------------------------------------------------------------------
# KNN batch prediction
# ---------------------------------------------------------------------------

def knn_predict(train_x: np.ndarray, train_y: np.ndarray, queries: np.ndarray, k: int) -> np.ndarray:
    """Mean target of the k nearest training rows per query.

    Nearest = smallest squared Euclidean distance, distance ties broken by
    lower training-row index. The numba path prunes the scan through a
    first-coordinate sort; results are identical to the brute-force fallback.
    """
    train_x = np.ascontiguousarray(train_x, dtype=np.float64)
    train_y = np.ascontiguousarray(train_y, dtype=np.float64)
    queries = np.ascontiguousarray(queries, dtype=np.float64)
    if queries.shape[0] == 0:
        return np.empty(0)
    if backend_name() == "numba":
        order = np.argsort(train_x[:, 0], kind="stable").astype(np.int64)
        with _KERNEL_LOCK:
            return _knn_predict_numba(
                np.ascontiguousarray(train_x[order]), train_y, queries, k, order)
    return _knn_predict_numpy(train_x, train_y, queries, k)


def _knn_predict_numpy(train_x, train_y, queries, k, block: int = 256) -> np.ndarray:
    n = train_x.shape[0]
    d = train_x.shape[1]
    out = np.empty(queries.shape[0])
    for start in range(0, queries.shape[0], block):
        q = queries[start:start + block]
        # One pass per feature keeps the summation order identical to the
        # scalar loop in the numba kernel.
        d2 = np.zeros((q.shape[0], n))
        for c in range(d):
            diff = q[:, c, None] - train_x[None, :, c]
            d2 += diff * diff
        idx = np.argsort(d2, axis=1, kind="stable")[:, :k]
        acc = np.zeros(q.shape[0])
        for j in range(k):
            acc += train_y[idx[:, j]]
        out[start:start + block] = acc / k
    return out


@njit(cache=True, nogil=True, parallel=True)
def _knn_predict_numba(sorted_x, train_y, queries, k, orig_idx):  # pragma: no cover - exercised via knn_predict
    # sorted_x is the training matrix ordered by column 0; orig_idx maps each
    # sorted row back to its original index (used for tie-breaks and targets).
    m = queries.shape[0]
    n = sorted_x.shape[0]
    d = sorted_x.shape[1]
    out = np.empty(m)
    x0 = sorted_x[:, 0].copy()
    for qi in prange(m):
        best_d = np.empty(k)
        best_i = np.empty(k, dtype=np.int64)
        for j in range(k):
            best_d[j] = np.inf
            best_i[j] = 9223372036854775807  # int64 max: loses every index tie
        q0 = queries[qi, 0]
        right = np.searchsorted(x0, q0)
        left = right - 1
        while left >= 0 or right < n:
            # Walk outward, nearer side first. When even the nearer gap alone
            # exceeds the current k-th distance, no remaining row on either
            # side can qualify (best_d[k-1] stays inf until k rows are in,
            # so the prune never fires early).
            gap_l = q0 - x0[left] if left >= 0 else np.inf
            gap_r = x0[right] - q0 if right < n else np.inf
            if gap_l <= gap_r:
                gap = gap_l
                i = left
            else:
                gap = gap_r
                i = right
            if gap * gap > best_d[k - 1]:
                break
            if gap_l <= gap_r:
                left -= 1
            else:
                right += 1
            dist = 0.0
            for c in range(d):
                diff = queries[qi, c] - sorted_x[i, c]
                dist += diff * diff
            oi = orig_idx[i]
            if dist < best_d[k - 1] or (dist == best_d[k - 1] and oi < best_i[k - 1]):
                j = k - 1
                while j > 0 and (best_d[j - 1] > dist or
                                 (best_d[j - 1] == dist and best_i[j - 1] > oi)):
                    best_d[j] = best_d[j - 1]
                    best_i[j] = best_i[j - 1]
                    j -= 1
                best_d[j] = dist
                best_i[j] = oi
        acc = 0.0
        for j in range(k):
            acc += train_y[best_i[j]]
        out[qi] = acc / k
    return out


# ---------------------------------------------------------------------------
# CART best-split search
# ---------------------------------------------------------------------------

NO_SPLIT = -1


def best_split(x: np.ndarray, y: np.ndarray, min_leaf: int) -> tuple[int, float, float]:
    """Exhaustive best binary split of (x, y) by summed child SSE.

    Candidate thresholds are midpoints between consecutive distinct sorted
    feature values with both children >= min_leaf rows. Returns
    (feature, threshold, child_sse_sum); feature == NO_SPLIT when no
    candidate exists. Ties resolve to the lowest feature index, then the
    lowest threshold.
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    if backend_name() == "numba":
        feat, thr, sse = _best_split_numba(x, y, min_leaf)
    else:
        feat, thr, sse = _best_split_numpy(x, y, min_leaf)
    return int(feat), float(thr), float(sse)


def _best_split_numpy(x, y, min_leaf):
    n, n_feat = x.shape
    best_feat = NO_SPLIT
    best_thr = 0.0
    best_sse = np.inf
    if n < 2 * min_leaf:
        return best_feat, best_thr, best_sse
    for f in range(n_feat):
        order = np.argsort(x[:, f], kind="stable")
        xs = x[order, f]
        ys = y[order]
        cum_y = np.cumsum(ys)
        cum_y2 = np.cumsum(ys * ys)
        total_y = cum_y[-1]
        total_y2 = cum_y2[-1]
        s = np.arange(min_leaf, n - min_leaf + 1)
        valid = xs[s - 1] < xs[s]
        if not valid.any():
            continue
        s = s[valid]
        left_y = cum_y[s - 1]
        left_y2 = cum_y2[s - 1]
        sse = (left_y2 - left_y * left_y / s) + (
            (total_y2 - left_y2) - (total_y - left_y) * (total_y - left_y) / (n - s)
        )
        pos = int(np.argmin(sse))  # first minimum = lowest threshold
        if sse[pos] < best_sse:
            best_sse = float(sse[pos])
            best_feat = f
            best_thr = (xs[s[pos] - 1] + xs[s[pos]]) / 2.0
    return best_feat, best_thr, best_sse


@njit(cache=True, nogil=True)
def _best_split_numba(x, y, min_leaf):  # pragma: no cover - exercised via best_split
    n, n_feat = x.shape
    best_feat = -1
    best_thr = 0.0
    best_sse = np.inf
    if n < 2 * min_leaf:
        return best_feat, best_thr, best_sse
    for f in range(n_feat):
        order = np.argsort(x[:, f], kind="mergesort")
        xs = np.empty(n)
        ys = np.empty(n)
        for i in range(n):
            xs[i] = x[order[i], f]
            ys[i] = y[order[i]]
        cum_y = np.empty(n)
        cum_y2 = np.empty(n)
        acc = 0.0
        acc2 = 0.0
        for i in range(n):
            acc += ys[i]
            acc2 += ys[i] * ys[i]
            cum_y[i] = acc
            cum_y2[i] = acc2
        total_y = cum_y[n - 1]
        total_y2 = cum_y2[n - 1]
        for s in range(min_leaf, n - min_leaf + 1):
            if not xs[s - 1] < xs[s]:
                continue
            left_y = cum_y[s - 1]
            left_y2 = cum_y2[s - 1]
            sse = (left_y2 - left_y * left_y / s) + (
                (total_y2 - left_y2) - (total_y - left_y) * (total_y - left_y) / (n - s)
            )
            if sse < best_sse:
                best_sse = sse
                best_feat = f
                best_thr = (xs[s - 1] + xs[s]) / 2.0
    return best_feat, best_thr, best_sse
