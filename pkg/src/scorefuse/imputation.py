"""Missing-score repair: listwise deletion, mean/median substitution, and
iterative chained-equation imputation with pluggable regressors.

The iterative fit seeds missing training cells with column means, then
sweeps the modalities in ascending index order: fit a regressor predicting
column m from the other columns on the rows where m was observed, re-predict
m's originally-missing cells, and repeat until the largest imputed-cell
change drops below tolerance or the sweep cap is reached. Applying a fitted
imputer replays the same chain with the frozen regressors for the same
number of sweeps, so test data never influences the fit.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    EmptyColumn,
    NotEnoughObservedRows,
    RegressorFitFailure,
    ShapeMismatch,
)
from .model import ScoreTable
from .regressors import (
    fit_bayesian_ridge,
    fit_cart,
    fit_knn,
    model_from_dict,
)

LISTWISE = "listwise"
MEAN = "mean"
MEDIAN = "median"
ITERATIVE = "iterative"
METHODS = (LISTWISE, MEAN, MEDIAN, ITERATIVE)

BAYESIAN_RIDGE = "bayesian_ridge"
CART = "cart"
KNN = "knn"
REGRESSORS = (BAYESIAN_RIDGE, CART, KNN)


@dataclass(frozen=True)
class ImputerSpec:
    method: str
    regressor: str | None = None
    max_iterations: int = 10
    tolerance: float = 1e-3
    knn_k: int = 5
    cart_max_depth: int = 8
    cart_min_leaf: int = 5
    ridge_max_updates: int = 300
    ridge_tolerance: float = 1e-3

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; choose one of {METHODS}")
        if self.method == ITERATIVE:
            if self.regressor not in REGRESSORS:
                raise ValueError(
                    f"iterative imputation needs a regressor from {REGRESSORS}, "
                    f"got {self.regressor!r}"
                )
        elif self.regressor is not None:
            raise ValueError(f"method {self.method!r} takes no regressor")
        for name in ("max_iterations", "tolerance", "knn_k", "cart_max_depth",
                     "cart_min_leaf", "ridge_max_updates", "ridge_tolerance"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")

    @property
    def name(self) -> str:
        """Report label, e.g. 'mean' or 'iterative_knn'."""
        if self.method == ITERATIVE:
            return f"iterative_{self.regressor}"
        return self.method

    def min_observed_rows(self) -> int:
        """Observed training rows a modality needs before fitting is attempted."""
        if self.method != ITERATIVE:
            return 1
        if self.regressor == KNN:
            return max(self.knn_k, 2)
        if self.regressor == CART:
            return max(self.cart_min_leaf, 2)
        return 2

    def to_dict(self) -> dict:
        out = {"method": self.method}
        if self.regressor is not None:
            out["regressor"] = self.regressor
        defaults = ImputerSpec(method=MEAN)
        for key in ("max_iterations", "tolerance", "knn_k", "cart_max_depth",
                    "cart_min_leaf", "ridge_max_updates", "ridge_tolerance"):
            if getattr(self, key) != getattr(defaults, key):
                out[key] = getattr(self, key)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "ImputerSpec":
        allowed = {"method", "regressor", "max_iterations", "tolerance", "knn_k",
                   "cart_max_depth", "cart_min_leaf", "ridge_max_updates", "ridge_tolerance"}
        unknown = set(data) - allowed
        if unknown:
            raise ValueError(f"unknown imputer keys: {sorted(unknown)}")
        return cls(**data)


@dataclass(frozen=True)
class FittedImputer:
    """Frozen training state of one imputation method.

    Column statistics always come from present training cells only. For
    iterative specs, regressors[m] predicts modality m from the other
    columns and never sees column m as input.
    """

    spec: ImputerSpec
    modality_names: tuple[str, ...]
    column_means: np.ndarray
    column_medians: np.ndarray
    regressors: tuple | None = None
    iterations_run: int = 0
    final_max_delta: float = 0.0
    converged: bool = True
    train_row_count: int = 0

    def __post_init__(self):
        self.column_means.flags.writeable = False
        self.column_medians.flags.writeable = False

    def fill_value(self, modality_index: int) -> float:
        if self.spec.method == MEDIAN:
            return float(self.column_medians[modality_index])
        return float(self.column_means[modality_index])

    def to_json(self) -> str:
        payload = {
            "spec": self.spec.to_dict(),
            "modalities": list(self.modality_names),
            "column_means": self.column_means.tolist(),
            "column_medians": self.column_medians.tolist(),
            "iterations_run": self.iterations_run,
            "final_max_delta": self.final_max_delta,
            "converged": self.converged,
            "train_row_count": self.train_row_count,
            "regressors": [r.to_dict() for r in self.regressors] if self.regressors else None,
        }
        return json.dumps(payload, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "FittedImputer":
        payload = json.loads(text)
        regs = payload.get("regressors")
        return cls(
            spec=ImputerSpec.from_dict(payload["spec"]),
            modality_names=tuple(payload["modalities"]),
            column_means=np.asarray(payload["column_means"], dtype=np.float64),
            column_medians=np.asarray(payload["column_medians"], dtype=np.float64),
            regressors=tuple(model_from_dict(r) for r in regs) if regs else None,
            iterations_run=int(payload["iterations_run"]),
            final_max_delta=float(payload["final_max_delta"]),
            converged=bool(payload["converged"]),
            train_row_count=int(payload["train_row_count"]),
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json(), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "FittedImputer":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))


def _train_column_stats(table: ScoreTable, train_rows: np.ndarray | None):
    scores = table.scores if train_rows is None else table.scores[train_rows]
    present = ~np.isnan(scores)
    means = np.empty(table.modalities.count)
    medians = np.empty(table.modalities.count)
    for j, name in enumerate(table.modalities.names):
        col = scores[present[:, j], j]
        if col.size == 0:
            raise EmptyColumn(f"{name!r} has no present training scores")
        means[j] = col.mean()
        medians[j] = np.median(col)
    return means, medians, scores.shape[0]


def _fill_with(table: ScoreTable, values: np.ndarray) -> ScoreTable:
    scores = table.scores.copy()
    missing = np.isnan(scores)
    scores[missing] = np.broadcast_to(values, scores.shape)[missing]
    return table.with_scores(scores)


def impute_mean(table: ScoreTable, train_rows: np.ndarray | None = None) -> tuple[ScoreTable, FittedImputer]:
    """Replace every missing cell with its modality's training mean."""
    means, medians, n_train = _train_column_stats(table, train_rows)
    fitted = FittedImputer(
        spec=ImputerSpec(method=MEAN),
        modality_names=table.modalities.names,
        column_means=means,
        column_medians=medians,
        train_row_count=n_train,
    )
    return _fill_with(table, means), fitted


def impute_median(table: ScoreTable, train_rows: np.ndarray | None = None) -> tuple[ScoreTable, FittedImputer]:
    """Replace every missing cell with its modality's training median
    (even counts average the two middle values)."""
    means, medians, n_train = _train_column_stats(table, train_rows)
    fitted = FittedImputer(
        spec=ImputerSpec(method=MEDIAN),
        modality_names=table.modalities.names,
        column_means=means,
        column_medians=medians,
        train_row_count=n_train,
    )
    return _fill_with(table, medians), fitted


def listwise_delete(table: ScoreTable) -> ScoreTable:
    """Keep only rows with every modality present; may return an empty table."""
    return table.select(table.present.all(axis=1))


def apply_fitted_simple(table: ScoreTable, fitted: FittedImputer) -> ScoreTable:
    """Apply a fitted mean/median imputer to another table."""
    if fitted.modality_names != table.modalities.names:
        raise ShapeMismatch(
            f"imputer fitted for {fitted.modality_names}, table has {table.modalities.names}"
        )
    values = fitted.column_medians if fitted.spec.method == MEDIAN else fitted.column_means
    return _fill_with(table, values)


def _fit_one_regressor(spec: ImputerSpec, x: np.ndarray, y: np.ndarray):
    if spec.regressor == BAYESIAN_RIDGE:
        return fit_bayesian_ridge(
            x, y, max_updates=spec.ridge_max_updates, tolerance=spec.ridge_tolerance
        )
    if spec.regressor == CART:
        return fit_cart(x, y, max_depth=spec.cart_max_depth, min_leaf=spec.cart_min_leaf)
    return fit_knn(x, y, k=spec.knn_k)


def _other_columns(n_mod: int, m: int) -> np.ndarray:
    return np.array([j for j in range(n_mod) if j != m], dtype=np.int64)


def fit_iterative(
    table: ScoreTable,
    train_rows: np.ndarray | None,
    spec: ImputerSpec,
) -> FittedImputer:
    """Chained-equation fit on the training rows; see the module docstring."""
    if spec.method != ITERATIVE:
        raise ValueError(f"fit_iterative needs an iterative spec, got {spec.method!r}")
    n_mod = table.modalities.count
    if n_mod < 2:
        raise ValueError("iterative imputation needs >= 2 modalities")
    means, medians, n_train = _train_column_stats(table, train_rows)

    observed_full = table.present
    if train_rows is not None:
        train_scores = table.scores[train_rows]
        observed = observed_full[train_rows]
    else:
        train_scores = table.scores
        observed = observed_full

    threshold = spec.min_observed_rows()
    for j, name in enumerate(table.modalities.names):
        if int(observed[:, j].sum()) < threshold:
            raise NotEnoughObservedRows(
                f"{name!r}: {int(observed[:, j].sum())} observed training rows, "
                f"need >= {threshold} for {spec.name}"
            )

    working = train_scores.copy()
    missing = ~observed
    working[missing] = np.broadcast_to(means, working.shape)[missing]

    models: list = [None] * n_mod
    iterations_run = 0
    final_max_delta = 0.0
    converged = False
    for sweep in range(1, spec.max_iterations + 1):
        max_delta = 0.0
        for m in range(n_mod):
            others = _other_columns(n_mod, m)
            obs_m = observed[:, m]
            try:
                models[m] = _fit_one_regressor(
                    spec, working[np.ix_(obs_m, others)], train_scores[obs_m, m]
                )
            except Exception as exc:
                raise RegressorFitFailure(
                    f"{table.modalities.names[m]!r}: {spec.name} fit failed: {exc}"
                ) from exc
            miss_m = missing[:, m]
            if miss_m.any():
                preds = np.clip(models[m].predict(working[np.ix_(miss_m, others)]), 0.0, 1.0)
                delta = float(np.abs(working[miss_m, m] - preds).max())
                max_delta = max(max_delta, delta)
                working[miss_m, m] = preds
        iterations_run = sweep
        final_max_delta = max_delta
        if max_delta < spec.tolerance:
            converged = True
            break

    return FittedImputer(
        spec=spec,
        modality_names=table.modalities.names,
        column_means=means,
        column_medians=medians,
        regressors=tuple(models),
        iterations_run=iterations_run,
        final_max_delta=final_max_delta,
        converged=converged,
        train_row_count=n_train,
    )


def apply_iterative(table: ScoreTable, fitted: FittedImputer) -> ScoreTable:
    """Fill a table's missing cells with the frozen regressors.

    Replays the training chain: initialize with the training column means,
    then run the fitted regressors in ascending modality order for the same
    number of sweeps the fit used. Present cells never change; imputed
    values clamp to [0, 1].
    """
    if fitted.regressors is None:
        raise ValueError("apply_iterative needs a fitted iterative imputer")
    if fitted.modality_names != table.modalities.names:
        raise ShapeMismatch(
            f"imputer fitted for {fitted.modality_names}, table has {table.modalities.names}"
        )
    n_mod = table.modalities.count
    working = table.scores.copy()
    missing = np.isnan(working)
    if not missing.any():
        return table.with_scores(working)
    working[missing] = np.broadcast_to(fitted.column_means, working.shape)[missing]

    for _ in range(fitted.iterations_run):
        for m in range(n_mod):
            miss_m = missing[:, m]
            if not miss_m.any():
                continue
            others = _other_columns(n_mod, m)
            preds = fitted.regressors[m].predict(working[np.ix_(miss_m, others)])
            working[miss_m, m] = np.clip(preds, 0.0, 1.0)
    return table.with_scores(working)
