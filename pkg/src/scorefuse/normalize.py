"""Min-max score normalization fitted on training rows.

Present scores map to (s - min) / (max - min) per modality and clamp to
[0, 1]; test scores outside the training range clamp rather than extrapolate.
Missing cells stay missing.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DegenerateModality, ShapeMismatch
from .model import ScoreTable


@dataclass(frozen=True)
class NormParams:
    modality_names: tuple[str, ...]
    mins: np.ndarray
    maxs: np.ndarray
    fitted_on: np.ndarray  # present training scores per modality

    def __post_init__(self):
        for arr in (self.mins, self.maxs, self.fitted_on):
            arr.flags.writeable = False

    def to_json(self) -> str:
        payload = {
            name: {"min": float(lo), "max": float(hi), "fitted_on": int(n)}
            for name, lo, hi, n in zip(self.modality_names, self.mins, self.maxs, self.fitted_on)
        }
        return json.dumps(payload, indent=2, sort_keys=False)

    @classmethod
    def from_json(cls, text: str) -> "NormParams":
        payload = json.loads(text)
        names = tuple(payload)
        return cls(
            modality_names=names,
            mins=np.array([payload[n]["min"] for n in names]),
            maxs=np.array([payload[n]["max"] for n in names]),
            fitted_on=np.array([payload[n].get("fitted_on", 0) for n in names], dtype=np.int64),
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json(), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "NormParams":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))


def fit(table: ScoreTable, train_rows: np.ndarray | None = None) -> NormParams:
    """Per-modality min/max of the present training scores.

    Each modality needs at least two present training scores with distinct
    values, otherwise the affine map is undefined.
    """
    scores = table.scores if train_rows is None else table.scores[train_rows]
    present = ~np.isnan(scores)
    mins = np.empty(table.modalities.count)
    maxs = np.empty(table.modalities.count)
    counts = present.sum(axis=0)
    for j, name in enumerate(table.modalities.names):
        col = scores[present[:, j], j]
        if col.size < 2:
            raise DegenerateModality(f"{name!r}: {col.size} present training scores, need >= 2")
        lo, hi = col.min(), col.max()
        if lo == hi:
            raise DegenerateModality(f"{name!r}: all {col.size} training scores equal {lo}")
        mins[j], maxs[j] = lo, hi
    return NormParams(
        modality_names=table.modalities.names,
        mins=mins,
        maxs=maxs,
        fitted_on=counts.astype(np.int64),
    )


def transform(table: ScoreTable, params: NormParams) -> ScoreTable:
    """Apply the fitted affine map and clamp into [0, 1]."""
    if params.modality_names != table.modalities.names:
        raise ShapeMismatch(
            f"params fitted for {params.modality_names}, table has {table.modalities.names}"
        )
    span = params.maxs - params.mins
    scaled = (table.scores - params.mins) / span
    present = table.present
    scaled[present] = np.clip(scaled[present], 0.0, 1.0)
    return table.with_scores(scaled, normalized=True)
