"""Reproducible missing-score mask plans for three system-evolution scenarios.

- add_modality: one column is incrementally introduced, so a fraction of its
  cells is blanked while the other columns stay complete.
- merge: cells go missing uniformly at random across every column, subject to
  each row keeping at least one present score.
- retire: one column disappears from a fraction of the *test* rows only; the
  training partition stays complete.

"X% missing" always means a fraction of the cells in the scenario's scope
(the target column for add/retire, all cells for merge). A plan is a pure
function of (table shape, scenario, level, seed).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import AllScoresMissing, InfeasibleLevel, LevelOutOfRange, ShapeMismatch
from .model import DataSplit, ModalitySet, ScoreTable
from .util import round_half_up

ADD_MODALITY = "add_modality"
MERGE = "merge"
RETIRE = "retire"
SCENARIOS = (ADD_MODALITY, MERGE, RETIRE)

SCOPE_ALL = "train_and_test"
SCOPE_TEST_ONLY = "test_only"


@dataclass(frozen=True)
class Scenario:
    kind: str
    target_modality: str | None = None

    def __post_init__(self):
        if self.kind not in SCENARIOS:
            raise ValueError(f"unknown scenario {self.kind!r}; choose one of {SCENARIOS}")
        if self.kind in (ADD_MODALITY, RETIRE) and not self.target_modality:
            raise ValueError(f"scenario {self.kind!r} requires a target modality")
        if self.kind == MERGE and self.target_modality is not None:
            raise ValueError("merge scenario takes no target modality")


@dataclass(frozen=True)
class MaskPlan:
    """Exact set of (row, column) cells to blank, reproducible from the seed."""

    level: float
    scenario: Scenario
    rows: np.ndarray
    cols: np.ndarray
    seed: int
    scope: str
    table_shape: tuple[int, int]

    def __post_init__(self):
        self.rows.flags.writeable = False
        self.cols.flags.writeable = False

    @property
    def cell_count(self) -> int:
        return int(self.rows.shape[0])

    def cells(self) -> set[tuple[int, int]]:
        return set(zip(self.rows.tolist(), self.cols.tolist()))

    def to_csv(self, path: str | Path, modalities: ModalitySet) -> None:
        """Audit dump: one `row_index,modality` line per blanked cell."""
        with Path(path).open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["row_index", "modality"])
            for r, c in zip(self.rows.tolist(), self.cols.tolist()):
                writer.writerow([r, modalities.names[c]])


def _check_level(level: float) -> None:
    if not 0.0 <= level <= 1.0:
        raise LevelOutOfRange(f"missing level must be in [0, 1], got {level}")


def _sorted_plan(rows: np.ndarray, cols: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    order = np.lexsort((cols, rows))
    return rows[order].astype(np.int64), cols[order].astype(np.int64)


def plan_add_modality(table: ScoreTable, target_modality: str, level: float, seed: int) -> MaskPlan:
    """Blank round(level * n_rows) cells of the target column."""
    _check_level(level)
    col = table.modalities.index(target_modality)
    present = table.present
    k = round_half_up(level * table.n_rows)
    # Only rows where the target is present and another score survives.
    eligible = np.flatnonzero(present[:, col] & (present.sum(axis=1) >= 2))
    if k > eligible.size:
        raise InfeasibleLevel(
            f"cannot blank {k} cells of {target_modality!r}: only {eligible.size} rows "
            "can lose it without going empty"
        )
    rng = np.random.default_rng(seed)
    chosen = rng.choice(eligible, size=k, replace=False) if k else np.empty(0, dtype=np.int64)
    rows, cols = _sorted_plan(np.asarray(chosen, dtype=np.int64), np.full(k, col, dtype=np.int64))
    return MaskPlan(
        level=level,
        scenario=Scenario(ADD_MODALITY, target_modality),
        rows=rows,
        cols=cols,
        seed=seed,
        scope=SCOPE_ALL,
        table_shape=table.scores.shape,
    )


def plan_merge(table: ScoreTable, level: float, seed: int) -> MaskPlan:
    """Blank round(level * n_rows * N) cells uniformly across all columns.

    A uniform draw can empty rows; each emptied row gets one uniformly chosen
    cell restored and a random legal cell elsewhere blanked instead, keeping
    the blank count exact. Feasible only while level * N <= N - 1.
    """
    _check_level(level)
    n_rows, n_mod = table.scores.shape
    if level * n_mod > n_mod - 1 + 1e-12:
        raise InfeasibleLevel(
            f"merge level {level} with {n_mod} modalities cannot keep one score per row "
            f"(max feasible level is {(n_mod - 1) / n_mod})"
        )
    present = table.present
    k = round_half_up(level * n_rows * n_mod)
    flat_present = np.flatnonzero(present.reshape(-1))
    if k > flat_present.size - n_rows:
        raise InfeasibleLevel(
            f"cannot blank {k} of {flat_present.size} present cells and keep "
            f"{n_rows} rows non-empty"
        )
    rng = np.random.default_rng(seed)
    chosen = rng.choice(flat_present, size=k, replace=False) if k else np.empty(0, dtype=np.int64)

    blank = np.zeros(n_rows * n_mod, dtype=bool)
    blank[chosen] = True
    keep = present.reshape(-1) & ~blank
    remaining = keep.reshape(n_rows, n_mod).sum(axis=1)

    empty_rows = np.flatnonzero((remaining == 0) & (present.sum(axis=1) > 0))
    if empty_rows.size:
        _repair_empty_rows(rng, blank, keep, remaining, empty_rows, n_mod, present.reshape(-1))

    flat = np.flatnonzero(blank)
    rows, cols = _sorted_plan(flat // n_mod, flat % n_mod)
    return MaskPlan(
        level=level,
        scenario=Scenario(MERGE),
        rows=rows,
        cols=cols,
        seed=seed,
        scope=SCOPE_ALL,
        table_shape=table.scores.shape,
    )


def _repair_empty_rows(rng, blank, keep, remaining, empty_rows, n_mod, present_flat):
    """Restore one cell in each emptied row, blanking a legal cell elsewhere.

    Legal = currently kept and in a row that retains >= 2 scores, so the swap
    never creates a new empty row. Candidates are drawn by rejection against
    a compacting pool; a legal cell always exists while repairs remain.
    """
    pool = np.flatnonzero(keep)
    for row in empty_rows:
        row_cells = np.flatnonzero(blank[row * n_mod:(row + 1) * n_mod] &
                                   present_flat[row * n_mod:(row + 1) * n_mod]) + row * n_mod
        restore = row_cells[rng.integers(row_cells.size)]
        blank[restore] = False
        keep[restore] = True
        remaining[row] = 1

        stale = 0
        while True:
            if stale * 2 > pool.size:
                pool = pool[keep[pool] & (remaining[pool // n_mod] >= 2)]
                stale = 0
                if pool.size == 0:
                    raise InfeasibleLevel("no legal cell left to swap while repairing rows")
            cand = pool[rng.integers(pool.size)]
            if keep[cand] and remaining[cand // n_mod] >= 2:
                break
            stale += 1
        blank[cand] = True
        keep[cand] = False
        remaining[cand // n_mod] -= 1


def plan_retire(
    table: ScoreTable,
    split: DataSplit,
    target_modality: str,
    level: float,
    seed: int,
) -> MaskPlan:
    """Blank the target column in round(level * |test rows|) test rows."""
    _check_level(level)
    col = table.modalities.index(target_modality)
    test_mask = split.test_mask(table)
    present = table.present
    k = round_half_up(level * int(test_mask.sum()))
    eligible = np.flatnonzero(test_mask & present[:, col] & (present.sum(axis=1) >= 2))
    if k > eligible.size:
        raise InfeasibleLevel(
            f"cannot blank {target_modality!r} in {k} test rows: only {eligible.size} eligible"
        )
    rng = np.random.default_rng(seed)
    chosen = rng.choice(eligible, size=k, replace=False) if k else np.empty(0, dtype=np.int64)
    rows, cols = _sorted_plan(np.asarray(chosen, dtype=np.int64), np.full(k, col, dtype=np.int64))
    return MaskPlan(
        level=level,
        scenario=Scenario(RETIRE, target_modality),
        rows=rows,
        cols=cols,
        seed=seed,
        scope=SCOPE_TEST_ONLY,
        table_shape=table.scores.shape,
    )


def apply_plan(table: ScoreTable, plan: MaskPlan) -> ScoreTable:
    """Blank the planned cells; the input table is untouched."""
    if table.scores.shape != plan.table_shape:
        raise ShapeMismatch(
            f"plan built for shape {plan.table_shape}, table is {table.scores.shape}"
        )
    scores = table.scores.copy()
    scores[plan.rows, plan.cols] = np.nan
    out = table.with_scores(scores)
    if out.n_rows and not out.present.any(axis=1).all():
        raise AllScoresMissing("plan would leave a row with no present scores")
    return out
