"""Regression estimators used by the iterative imputer, built from first
principles: Bayesian ridge with evidence maximization, a CART regression
tree, and k-nearest-neighbors. Each fit_* returns an immutable model with a
vectorized .predict and a JSON-serializable payload."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import TooFewRows


# ---------------------------------------------------------------------------
# Bayesian ridge regression
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BayesianRidgeModel:
    weights: np.ndarray
    intercept: float
    weight_precision: float  # prior precision on the weights
    noise_precision: float
    updates_run: int
    converged: bool
    used_pinv: bool

    def predict(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        return x @ self.weights + self.intercept

    def to_dict(self) -> dict:
        return {
            "kind": "bayesian_ridge",
            "weights": self.weights.tolist(),
            "intercept": self.intercept,
            "weight_precision": self.weight_precision,
            "noise_precision": self.noise_precision,
            "updates_run": self.updates_run,
            "converged": self.converged,
            "used_pinv": self.used_pinv,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "BayesianRidgeModel":
        return cls(
            weights=np.asarray(data["weights"], dtype=np.float64),
            intercept=float(data["intercept"]),
            weight_precision=float(data["weight_precision"]),
            noise_precision=float(data["noise_precision"]),
            updates_run=int(data["updates_run"]),
            converged=bool(data["converged"]),
            used_pinv=bool(data["used_pinv"]),
        )


_PRECISION_FLOOR = 1e-10
_PRECISION_CAP = 1e12


def _solve_ridge(xtx: np.ndarray, xty: np.ndarray, ratio: float) -> tuple[np.ndarray, bool]:
    """w = (ratio*I + X'X)^-1 X'y with a pseudo-inverse fallback."""
    a = xtx + ratio * np.eye(xtx.shape[0])
    try:
        return np.linalg.solve(a, xty), False
    except np.linalg.LinAlgError:
        return np.linalg.pinv(a) @ xty, True


def fit_bayesian_ridge(
    x: np.ndarray,
    y: np.ndarray,
    max_updates: int = 300,
    tolerance: float = 1e-3,
    fixed_precisions: tuple[float, float] | None = None,
) -> BayesianRidgeModel:
    """Ridge posterior mean with hyperparameters set by evidence maximization.

    Columns are centered internally; the intercept absorbs the means.
    With `fixed_precisions` = (weight_precision, noise_precision), no
    evidence updates run: the solve uses the supplied values as-is.

    The update rule is the MacKay fixed point: with mu_i the eigenvalues of
    X'X (centered), the effective parameter count is
    gamma = sum_i beta*mu_i / (beta*mu_i + lambda), then
    lambda <- gamma / |w|^2 and beta <- (n - gamma) / |y - Xw|^2, iterated
    until the coefficient change drops below `tolerance`.
    """
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    y = np.asarray(y, dtype=np.float64)
    n, d = x.shape
    if n < 2:
        raise TooFewRows(f"bayesian ridge needs >= 2 rows, got {n}")

    x_mean = x.mean(axis=0)
    y_mean = y.mean()
    xc = x - x_mean
    yc = y - y_mean
    xtx = xc.T @ xc
    xty = xc.T @ yc

    used_pinv = False
    if fixed_precisions is not None:
        lam, beta = fixed_precisions
        w, used_pinv = _solve_ridge(xtx, xty, lam / beta)
        return BayesianRidgeModel(
            weights=w,
            intercept=float(y_mean - w @ x_mean),
            weight_precision=float(lam),
            noise_precision=float(beta),
            updates_run=0,
            converged=True,
            used_pinv=used_pinv,
        )

    y_var = yc @ yc / n
    lam = 1.0
    beta = 1.0 / y_var if y_var > 0 else 1.0
    eigvals = np.linalg.eigvalsh(xtx)
    eigvals = np.clip(eigvals, 0.0, None)

    w = np.zeros(d)
    converged = False
    updates = 0
    for updates in range(1, max_updates + 1):
        w_new, pinv_now = _solve_ridge(xtx, xty, lam / beta)
        used_pinv = used_pinv or pinv_now
        gamma = float(np.sum(beta * eigvals / (beta * eigvals + lam)))
        wtw = float(w_new @ w_new)
        resid = yc - xc @ w_new
        sse = float(resid @ resid)
        lam = gamma / wtw if wtw > 0 else _PRECISION_CAP
        beta = (n - gamma) / sse if sse > 0 else _PRECISION_CAP
        lam = min(max(lam, _PRECISION_FLOOR), _PRECISION_CAP)
        beta = min(max(beta, _PRECISION_FLOOR), _PRECISION_CAP)
        delta = float(np.abs(w_new - w).sum())
        w = w_new
        if delta < tolerance:
            converged = True
            break

    return BayesianRidgeModel(
        weights=w,
        intercept=float(y_mean - w @ x_mean),
        weight_precision=lam,
        noise_precision=beta,
        updates_run=updates,
        converged=converged,
        used_pinv=used_pinv,
    )


# ---------------------------------------------------------------------------
# CART regression tree
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CartTree:
    """Flattened binary tree: node i splits on feature[i] at threshold[i]
    (x <= threshold goes left); feature[i] == -1 marks a leaf predicting
    value[i]."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    @property
    def n_nodes(self) -> int:
        return int(self.feature.shape[0])

    @property
    def n_leaves(self) -> int:
        return int((self.feature == _kernels.NO_SPLIT).sum())

    def predict(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        idx = np.zeros(x.shape[0], dtype=np.int64)
        while True:
            feat = self.feature[idx]
            active = feat != _kernels.NO_SPLIT
            if not active.any():
                break
            rows = np.flatnonzero(active)
            f = feat[rows]
            go_left = x[rows, f] <= self.threshold[idx[rows]]
            idx[rows] = np.where(go_left, self.left[idx[rows]], self.right[idx[rows]])
        return self.value[idx]

    def to_dict(self) -> dict:
        return {
            "kind": "cart",
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CartTree":
        return cls(
            feature=np.asarray(data["feature"], dtype=np.int64),
            threshold=np.asarray(data["threshold"], dtype=np.float64),
            left=np.asarray(data["left"], dtype=np.int64),
            right=np.asarray(data["right"], dtype=np.int64),
            value=np.asarray(data["value"], dtype=np.float64),
        )


def fit_cart(x: np.ndarray, y: np.ndarray, max_depth: int = 8, min_leaf: int = 5) -> CartTree:
    """Greedy variance-reduction tree.

    A node splits only when some candidate strictly lowers the summed child
    SSE below the node's own, both children keep >= min_leaf rows, and the
    depth limit allows it.
    """
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    y = np.asarray(y, dtype=np.float64)
    if max_depth < 0 or min_leaf < 1:
        raise ValueError("max_depth must be >= 0 and min_leaf >= 1")
    n = x.shape[0]
    if n < 2 * min_leaf:
        raise TooFewRows(f"cart needs >= {2 * min_leaf} rows (min_leaf={min_leaf}), got {n}")

    feature: list[int] = []
    threshold: list[float] = []
    left: list[int] = []
    right: list[int] = []
    value: list[float] = []

    def node_sse(yv: np.ndarray) -> float:
        centered = yv - yv.mean()
        return float(centered @ centered)

    def grow(rows: np.ndarray, depth: int) -> int:
        node = len(feature)
        yv = y[rows]
        feature.append(_kernels.NO_SPLIT)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(float(yv.mean()))
        if depth >= max_depth or rows.size < 2 * min_leaf:
            return node
        if np.all(yv == yv[0]):
            return node
        sse_here = node_sse(yv)
        feat, thr, child_sse = _kernels.best_split(x[rows], yv, min_leaf)
        # require a gain clear of summation noise, not just a strict decrease
        if feat == _kernels.NO_SPLIT or not sse_here - child_sse > 1e-12 * max(1.0, sse_here):
            return node
        go_left = x[rows, feat] <= thr
        feature[node] = feat
        threshold[node] = thr
        left[node] = grow(rows[go_left], depth + 1)
        right[node] = grow(rows[~go_left], depth + 1)
        return node

    grow(np.arange(n), 0)
    return CartTree(
        feature=np.asarray(feature, dtype=np.int64),
        threshold=np.asarray(threshold, dtype=np.float64),
        left=np.asarray(left, dtype=np.int64),
        right=np.asarray(right, dtype=np.int64),
        value=np.asarray(value, dtype=np.float64),
    )


# ---------------------------------------------------------------------------
# K nearest neighbors
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class KnnModel:
    train_x: np.ndarray
    train_y: np.ndarray
    k: int

    def predict(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        return _kernels.knn_predict(self.train_x, self.train_y, x, self.k)

    def to_dict(self) -> dict:
        return {
            "kind": "knn",
            "train_x": self.train_x.tolist(),
            "train_y": self.train_y.tolist(),
            "k": self.k,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "KnnModel":
        return cls(
            train_x=np.asarray(data["train_x"], dtype=np.float64),
            train_y=np.asarray(data["train_y"], dtype=np.float64),
            k=int(data["k"]),
        )


def fit_knn(x: np.ndarray, y: np.ndarray, k: int = 5) -> KnnModel:
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    y = np.asarray(y, dtype=np.float64)
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if x.shape[0] < k:
        raise TooFewRows(f"knn with k={k} needs >= {k} rows, got {x.shape[0]}")
    return KnnModel(train_x=x.copy(), train_y=y.copy(), k=k)


def model_from_dict(data: dict):
    kind = data.get("kind")
    if kind == "bayesian_ridge":
        return BayesianRidgeModel.from_dict(data)
    if kind == "cart":
        return CartTree.from_dict(data)
    if kind == "knn":
        return KnnModel.from_dict(data)
    raise ValueError(f"unknown regressor payload kind {kind!r}")
