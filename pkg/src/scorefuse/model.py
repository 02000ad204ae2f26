"""Core domain types: modality sets, score tables and identity splits.

A ScoreTable holds one row per (probe, gallery) comparison with one optional
similarity score per modality. Missing scores are NaN cells in a float64
matrix; 0.0 is a legal score value, so no sentinel is ever used. All types
are immutable after construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import (
    AllScoresMissing,
    DuplicatePair,
    NonFiniteScore,
    TooFewIdentities,
)
from .util import round_half_up


@dataclass(frozen=True)
class ModalitySet:
    """Ordered, unique modality names; the order fixes column order everywhere."""

    names: tuple[str, ...]

    def __post_init__(self):
        names = tuple(str(n) for n in self.names)
        object.__setattr__(self, "names", names)
        if len(names) == 0:
            raise ValueError("at least one modality is required")
        if any(n == "" for n in names):
            raise ValueError("modality names must be non-empty")
        if len(set(names)) != len(names):
            raise ValueError(f"modality names must be unique: {names}")

    @property
    def count(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            from .errors import UnknownModality

            raise UnknownModality(f"unknown modality {name!r}; have {self.names}") from None

    def __len__(self) -> int:
        return len(self.names)

    def __iter__(self) -> Iterator[str]:
        return iter(self.names)


@dataclass(frozen=True)
class ComparisonRow:
    """One probe-vs-gallery comparison; scores[i] is None when missing."""

    probe_id: str
    gallery_id: str
    genuine: bool
    scores: tuple[float | None, ...]


@dataclass(frozen=True)
class ScoreTable:
    """Immutable probe x gallery score table.

    scores is (n_rows, n_modalities) float64 with NaN marking missing cells.
    labels[i] is True for genuine rows (probe_id == gallery_id).
    """

    modalities: ModalitySet
    probe_ids: np.ndarray
    gallery_ids: np.ndarray
    labels: np.ndarray
    scores: np.ndarray
    normalized: bool = False

    def __post_init__(self):
        for arr in (self.probe_ids, self.gallery_ids, self.labels, self.scores):
            arr.flags.writeable = False

    @property
    def n_rows(self) -> int:
        return self.scores.shape[0]

    @property
    def genuine_count(self) -> int:
        return int(self.labels.sum())

    @property
    def impostor_count(self) -> int:
        return self.n_rows - self.genuine_count

    @property
    def present(self) -> np.ndarray:
        """Boolean (n_rows, n_modalities) mask of present cells."""
        return ~np.isnan(self.scores)

    def row(self, i: int) -> ComparisonRow:
        vals = tuple(None if np.isnan(v) else float(v) for v in self.scores[i])
        return ComparisonRow(
            probe_id=str(self.probe_ids[i]),
            gallery_id=str(self.gallery_ids[i]),
            genuine=bool(self.labels[i]),
            scores=vals,
        )

    def __len__(self) -> int:
        return self.n_rows

    def with_scores(self, scores: np.ndarray, normalized: bool | None = None) -> "ScoreTable":
        """New table sharing ids/labels with a replaced score matrix."""
        if scores.shape != self.scores.shape:
            raise ValueError(f"score shape {scores.shape} != {self.scores.shape}")
        flag = self.normalized if normalized is None else normalized
        return ScoreTable(
            modalities=self.modalities,
            probe_ids=self.probe_ids,
            gallery_ids=self.gallery_ids,
            labels=self.labels,
            scores=np.ascontiguousarray(scores, dtype=np.float64),
            normalized=flag,
        )

    def select(self, row_mask: np.ndarray) -> "ScoreTable":
        """Row subset; keeps modality order and the normalized flag."""
        return ScoreTable(
            modalities=self.modalities,
            probe_ids=self.probe_ids[row_mask].copy(),
            gallery_ids=self.gallery_ids[row_mask].copy(),
            labels=self.labels[row_mask].copy(),
            scores=self.scores[row_mask].copy(),
            normalized=self.normalized,
        )


def table_equal(a: ScoreTable, b: ScoreTable) -> bool:
    """Bit-exact equality; NaN cells compare equal to NaN cells."""
    if a.modalities.names != b.modalities.names or a.normalized != b.normalized:
        return False
    if a.scores.shape != b.scores.shape:
        return False
    if not (np.array_equal(a.probe_ids, b.probe_ids) and np.array_equal(a.gallery_ids, b.gallery_ids)):
        return False
    return np.array_equal(a.scores, b.scores, equal_nan=True)


def build_table(
    modalities: ModalitySet,
    records: Iterable[tuple[str, str, Sequence[float | None]]],
    normalized: bool = False,
) -> ScoreTable:
    """Validate raw (probe_id, gallery_id, scores) records into a ScoreTable.

    Labels are derived from id equality. Rejects duplicate (probe, gallery)
    pairs, rows with every score absent, and non-finite present scores.
    """
    n_mod = modalities.count
    probes: list[str] = []
    galleries: list[str] = []
    rows: list[np.ndarray] = []
    seen: set[tuple[str, str]] = set()

    for probe_id, gallery_id, raw_scores in records:
        probe_id, gallery_id = str(probe_id), str(gallery_id)
        key = (probe_id, gallery_id)
        if key in seen:
            raise DuplicatePair(f"duplicate (probe, gallery) pair {key}")
        seen.add(key)
        if len(raw_scores) != n_mod:
            raise NonFiniteScore(
                f"row {key}: expected {n_mod} scores, got {len(raw_scores)}"
            )
        vals = np.full(n_mod, np.nan)
        any_present = False
        for j, s in enumerate(raw_scores):
            if s is None:
                continue
            s = float(s)
            if np.isnan(s):
                continue
            if not np.isfinite(s):
                raise NonFiniteScore(
                    f"row {key}, modality {modalities.names[j]!r}: non-finite score {s}"
                )
            vals[j] = s
            any_present = True
        if not any_present:
            raise AllScoresMissing(f"row {key} has no present scores")
        probes.append(probe_id)
        galleries.append(gallery_id)
        rows.append(vals)

    probe_arr = np.array(probes, dtype=object)
    gallery_arr = np.array(galleries, dtype=object)
    scores = np.vstack(rows) if rows else np.empty((0, n_mod))
    labels = np.array([p == g for p, g in zip(probes, galleries)], dtype=bool)
    return ScoreTable(
        modalities=modalities,
        probe_ids=probe_arr,
        gallery_ids=gallery_arr,
        labels=labels,
        scores=np.ascontiguousarray(scores, dtype=np.float64),
        normalized=normalized,
    )


@dataclass(frozen=True)
class DataSplit:
    """Disjoint train/test partition of probe identities.

    The gallery is never split: identification always ranks against the full
    gallery, only probe identities move between partitions.
    """

    train_probe_ids: frozenset[str]
    test_probe_ids: frozenset[str]

    def __post_init__(self):
        if self.train_probe_ids & self.test_probe_ids:
            raise ValueError("train and test probe identities overlap")

    def train_mask(self, table: ScoreTable) -> np.ndarray:
        return np.array([p in self.train_probe_ids for p in table.probe_ids], dtype=bool)

    def test_mask(self, table: ScoreTable) -> np.ndarray:
        return np.array([p in self.test_probe_ids for p in table.probe_ids], dtype=bool)


def split_by_probe(table: ScoreTable, fraction: float, seed: int) -> DataSplit:
    """Seeded partition of probe identities into train/test.

    All rows of one probe identity land on the same side. Train size is
    round(fraction * n_identities), clamped so both sides are non-empty.
    """
    if not 0.0 < fraction < 1.0:
        raise ValueError(f"fraction must be in (0, 1), got {fraction}")
    ids = sorted(set(str(p) for p in table.probe_ids))
    if len(ids) < 2:
        raise TooFewIdentities(f"need >= 2 probe identities, have {len(ids)}")
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(ids))
    n_train = round_half_up(fraction * len(ids))
    n_train = min(max(n_train, 1), len(ids) - 1)
    train = frozenset(ids[i] for i in order[:n_train])
    test = frozenset(ids[i] for i in order[n_train:])
    return DataSplit(train_probe_ids=train, test_probe_ids=test)
