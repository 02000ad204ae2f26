import numpy as np
import pytest

from scorefuse.errors import TooFewRows
from scorefuse.regressors import (
    BayesianRidgeModel,
    CartTree,
    KnnModel,
    fit_bayesian_ridge,
    fit_cart,
    fit_knn,
    model_from_dict,
)


# ---------------------------------------------------------------------------
# Bayesian ridge
# ---------------------------------------------------------------------------

def test_ridge_noiseless_linear_limit():
    rng = np.random.default_rng(0)
    x = rng.random((50, 1))
    y = 2.0 * x[:, 0]
    model = fit_bayesian_ridge(x, y)
    assert abs(model.predict(np.array([[3.0]]))[0] - 6.0) < 1e-6


def test_ridge_prior_dominates_limit():
    rng = np.random.default_rng(1)
    x = rng.random((40, 2))
    y = rng.random(40)
    model = fit_bayesian_ridge(x, y, fixed_precisions=(1e12, 1.0))
    assert np.all(np.abs(model.weights) < 1e-9)
    assert np.allclose(model.predict(x), y.mean(), atol=1e-6)


def test_ridge_frozen_precisions_match_direct_solve():
    # closed form on centered data as the independent oracle
    rng = np.random.default_rng(2)
    for trial in range(20):
        x = rng.random((10, 3))
        y = rng.random(10)
        lam, beta = 0.7, 3.0
        model = fit_bayesian_ridge(x, y, fixed_precisions=(lam, beta))
        xc = x - x.mean(axis=0)
        yc = y - y.mean()
        w = np.linalg.solve(lam / beta * np.eye(3) + xc.T @ xc, xc.T @ yc)
        assert np.all(np.abs(model.weights - w) < 1e-8)
        expect = x @ w + (y.mean() - w @ x.mean(axis=0))
        assert np.all(np.abs(model.predict(x) - expect) < 1e-8)


def test_ridge_evidence_updates_fit_noisy_line():
    rng = np.random.default_rng(3)
    x = rng.random((200, 1))
    y = 1.5 * x[:, 0] + 0.3 + rng.normal(0, 0.05, 200)
    model = fit_bayesian_ridge(x, y)
    assert model.converged
    assert abs(model.weights[0] - 1.5) < 0.1
    assert abs(model.intercept - 0.3) < 0.05
    # noise precision should land near 1/sigma^2 = 400
    assert 200 < model.noise_precision < 800


def test_ridge_constant_target():
    x = np.linspace(0, 1, 20).reshape(-1, 1)
    y = np.full(20, 0.4)
    model = fit_bayesian_ridge(x, y)
    assert np.allclose(model.predict(np.array([[0.5], [0.9]])), 0.4, atol=1e-9)


def test_ridge_too_few_rows():
    with pytest.raises(TooFewRows):
        fit_bayesian_ridge(np.ones((1, 2)), np.ones(1))


def test_ridge_serialization_round_trip():
    rng = np.random.default_rng(4)
    model = fit_bayesian_ridge(rng.random((30, 2)), rng.random(30))
    back = model_from_dict(model.to_dict())
    assert isinstance(back, BayesianRidgeModel)
    assert np.array_equal(back.weights, model.weights)
    assert back.intercept == model.intercept


# ---------------------------------------------------------------------------
# CART
# ---------------------------------------------------------------------------

def brute_force_split_1d(x, y, min_leaf):
    """All midpoints between consecutive distinct sorted values, minimum
    summed child SSE, lowest threshold on ties."""
    order = np.argsort(x, kind="stable")
    xs, ys = x[order], y[order]
    best = (np.inf, None)
    n = len(xs)
    for s in range(min_leaf, n - min_leaf + 1):
        if xs[s - 1] == xs[s]:
            continue
        left, right = ys[:s], ys[s:]
        sse = ((left - left.mean()) ** 2).sum() + ((right - right.mean()) ** 2).sum()
        if sse < best[0] - 1e-12:
            best = (sse, (xs[s - 1] + xs[s]) / 2.0)
    return best[1]


def test_cart_constant_target_single_leaf():
    x = np.linspace(0, 1, 20).reshape(-1, 1)
    y = np.full(20, 3.3)
    tree = fit_cart(x, y, max_depth=4, min_leaf=2)
    assert tree.n_nodes == 1
    assert np.allclose(tree.predict(x), 3.3)


def test_cart_step_data_depth_one_exact():
    x = np.linspace(0, 1, 20).reshape(-1, 1)
    y = (x[:, 0] >= 0.5).astype(float)
    tree = fit_cart(x, y, max_depth=3, min_leaf=2)
    assert tree.n_leaves == 2
    assert np.array_equal(tree.predict(x), y)
    thr = tree.threshold[0]
    assert thr == brute_force_split_1d(x[:, 0], y, 2)


def test_cart_first_split_matches_brute_force_1d():
    rng = np.random.default_rng(5)
    for trial in range(30):
        x = rng.random((40, 1))
        y = rng.random(40)
        tree = fit_cart(x, y, max_depth=1, min_leaf=5)
        expect = brute_force_split_1d(x[:, 0], y, 5)
        if expect is None:
            assert tree.n_nodes == 1
        else:
            assert tree.feature[0] == 0
            assert tree.threshold[0] == pytest.approx(expect, abs=0)


def test_cart_depth_zero_single_leaf():
    rng = np.random.default_rng(6)
    x = rng.random((20, 2))
    y = rng.random(20)
    tree = fit_cart(x, y, max_depth=0, min_leaf=5)
    assert tree.n_nodes == 1
    assert np.allclose(tree.predict(x), y.mean())


def test_cart_min_leaf_respected():
    rng = np.random.default_rng(7)
    x = rng.random((60, 2))
    y = x[:, 0] + rng.normal(0, 0.01, 60)
    min_leaf = 7
    tree = fit_cart(x, y, max_depth=6, min_leaf=min_leaf)
    # count training rows reaching each leaf
    leaf_of_row = np.zeros(60, dtype=int)
    idx = np.zeros(60, dtype=int)
    while True:
        active = tree.feature[idx] != -1
        if not active.any():
            break
        rows = np.flatnonzero(active)
        f = tree.feature[idx[rows]]
        go_left = x[rows, f] <= tree.threshold[idx[rows]]
        idx[rows] = np.where(go_left, tree.left[idx[rows]], tree.right[idx[rows]])
    leaf_of_row = idx
    counts = np.bincount(leaf_of_row, minlength=tree.n_nodes)
    leaf_ids = np.flatnonzero(tree.feature == -1)
    assert all(counts[i] >= min_leaf for i in leaf_ids)


def test_cart_too_few_rows():
    with pytest.raises(TooFewRows):
        fit_cart(np.ones((9, 1)), np.ones(9), min_leaf=5)


def test_cart_serialization_round_trip():
    rng = np.random.default_rng(8)
    x = rng.random((50, 3))
    y = x @ np.array([1.0, -2.0, 0.5])
    tree = fit_cart(x, y)
    back = model_from_dict(tree.to_dict())
    assert isinstance(back, CartTree)
    assert np.array_equal(back.predict(x), tree.predict(x))


# ---------------------------------------------------------------------------
# KNN
# ---------------------------------------------------------------------------

def knn_oracle(train_x, train_y, query, k):
    """Exhaustive sort by (distance, index)."""
    d = ((train_x - query) ** 2).sum(axis=1)
    order = np.lexsort((np.arange(len(d)), d))
    return train_y[order[:k]].mean()


def test_knn_nearest_neighbor_cases():
    model = fit_knn(np.array([[0.0], [1.0]]), np.array([0.0, 1.0]), k=1)
    assert model.predict(np.array([[0.1]]))[0] == 0.0
    both = fit_knn(np.array([[0.0], [1.0]]), np.array([0.0, 1.0]), k=2)
    assert both.predict(np.array([[0.77]]))[0] == 0.5


def test_knn_matches_exhaustive_oracle():
    rng = np.random.default_rng(9)
    for trial in range(100):
        x = rng.random((20, 3))
        y = rng.random(20)
        q = rng.random((1, 3))
        model = fit_knn(x, y, k=5)
        assert model.predict(q)[0] == knn_oracle(x, y, q[0], 5)


def test_knn_tie_break_by_lower_index():
    # two training rows at the same point with different targets
    x = np.array([[0.5, 0.5], [0.5, 0.5], [0.9, 0.9]])
    y = np.array([1.0, 2.0, 3.0])
    model = fit_knn(x, y, k=1)
    assert model.predict(np.array([[0.5, 0.5]]))[0] == 1.0


def test_knn_k_larger_than_store():
    with pytest.raises(TooFewRows):
        fit_knn(np.ones((3, 2)), np.ones(3), k=5)


def test_knn_serialization_round_trip():
    rng = np.random.default_rng(10)
    model = fit_knn(rng.random((15, 2)), rng.random(15), k=3)
    back = model_from_dict(model.to_dict())
    assert isinstance(back, KnnModel)
    q = rng.random((4, 2))
    assert np.array_equal(back.predict(q), model.predict(q))
