"""Simple-sum fusion and both recognition tasks: verification (ROC, AUC,
EER, TPR@FPR) and identification (CMC rank-k accuracy)."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    IncompleteWithSkipDisabled,
    MalformedLine,
    OneClassOnly,
    ProbeWithMultipleMates,
    ProbeWithoutMate,
    RowWithNoScores,
)
from .model import ScoreTable

PROVENANCE_COMPLETE = "complete"
PROVENANCE_AVAILABLE_ONLY = "available_only"
PROVENANCE_LISTWISE = "listwise"


@dataclass(frozen=True)
class FusedScores:
    """One fused score per surviving comparison row."""

    probe_ids: np.ndarray
    gallery_ids: np.ndarray
    labels: np.ndarray
    scores: np.ndarray
    provenance: str

    def __post_init__(self):
        for arr in (self.probe_ids, self.gallery_ids, self.labels, self.scores):
            arr.flags.writeable = False

    @property
    def n_rows(self) -> int:
        return int(self.scores.shape[0])

    def genuine_scores(self) -> np.ndarray:
        return self.scores[self.labels]

    def impostor_scores(self) -> np.ndarray:
        return self.scores[~self.labels]


def fuse_simple_sum(
    table: ScoreTable,
    skip_missing: bool = False,
    provenance: str | None = None,
) -> FusedScores:
    """Fused score = arithmetic mean of the row's scores.

    With skip_missing, the mean runs over the present scores only (the
    no-imputation baseline); otherwise the table must be complete.
    """
    present = table.present
    counts = present.sum(axis=1)
    if (counts == 0).any():
        bad = int(np.flatnonzero(counts == 0)[0])
        raise RowWithNoScores(f"row {bad} has no scores to fuse")
    if not skip_missing and not present.all():
        n_missing = int((~present).sum())
        raise IncompleteWithSkipDisabled(
            f"{n_missing} missing cells; impute first or pass skip_missing=True"
        )
    totals = np.nansum(table.scores, axis=1)
    fused = totals / counts
    if provenance is None:
        provenance = PROVENANCE_AVAILABLE_ONLY if skip_missing else PROVENANCE_COMPLETE
    return FusedScores(
        probe_ids=table.probe_ids.copy(),
        gallery_ids=table.gallery_ids.copy(),
        labels=table.labels.copy(),
        scores=fused,
        provenance=provenance,
    )


@dataclass(frozen=True)
class RocCurve:
    """Verification trade-off curve.

    Points are ordered by ascending threshold; fpr and tpr are then
    non-increasing, starting at (1, 1) below the lowest score and ending at
    (0, 0) above the highest.
    """

    thresholds: np.ndarray
    fpr: np.ndarray
    tpr: np.ndarray
    auc: float
    eer: float

    def __post_init__(self):
        for arr in (self.thresholds, self.fpr, self.tpr):
            arr.flags.writeable = False

    def tpr_at_fpr(self, targets) -> np.ndarray:
        """Linear interpolation of the curve at the requested FPR values."""
        fpr_asc = self.fpr[::-1]
        tpr_asc = self.tpr[::-1]
        # Collapse duplicate fpr values to their best tpr (the last in
        # ascending order, since tpr rises with fpr).
        keep = np.r_[fpr_asc[1:] != fpr_asc[:-1], True]
        return np.interp(np.asarray(targets, dtype=np.float64), fpr_asc[keep], tpr_asc[keep])

    def to_csv(self, path: str | Path) -> None:
        with Path(path).open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["threshold", "fpr", "tpr"])
            for t, f, r in zip(self.thresholds, self.fpr, self.tpr):
                writer.writerow([repr(float(t)), repr(float(f)), repr(float(r))])


def roc(fused: FusedScores) -> RocCurve:
    """ROC over all distinct fused scores plus sentinel thresholds.

    tpr(t) = P(score >= t | genuine), fpr(t) = P(score >= t | impostor).
    AUC is the trapezoidal integral; EER comes from linear interpolation
    between the two points bracketing the fpr = 1 - tpr crossing.
    """
    genuine = np.sort(fused.genuine_scores())
    impostor = np.sort(fused.impostor_scores())
    if genuine.size == 0 or impostor.size == 0:
        raise OneClassOnly(
            f"need both classes: {genuine.size} genuine, {impostor.size} impostor"
        )
    all_scores = np.unique(np.concatenate([genuine, impostor]))
    lo = all_scores[0] - 1.0
    hi = all_scores[-1] + 1.0
    thresholds = np.concatenate([[lo], all_scores, [hi]])

    # score >= t counts via binary search on the sorted class scores
    tpr = (genuine.size - np.searchsorted(genuine, thresholds, side="left")) / genuine.size
    fpr = (impostor.size - np.searchsorted(impostor, thresholds, side="left")) / impostor.size

    auc = float(np.trapezoid(tpr[::-1], fpr[::-1]))
    eer = _interpolate_eer(fpr, tpr)
    return RocCurve(thresholds=thresholds, fpr=fpr, tpr=tpr, auc=auc, eer=eer)


def _interpolate_eer(fpr: np.ndarray, tpr: np.ndarray) -> float:
    # diff = fpr - fnr is non-increasing along ascending thresholds, from +1
    # at the low sentinel to -1 at the high one, so a sign change exists.
    diff = fpr - (1.0 - tpr)
    idx = int(np.flatnonzero(diff <= 0.0)[0])
    if diff[idx] == 0.0:
        return float(fpr[idx])
    a, b = idx - 1, idx
    frac = diff[a] / (diff[a] - diff[b])
    return float(fpr[a] + frac * (fpr[b] - fpr[a]))


@dataclass(frozen=True)
class CmcCurve:
    """Cumulative match characteristic: accuracies[k-1] is the fraction of
    probes whose genuine mate ranks within the top k."""

    accuracies: np.ndarray
    probe_count: int

    def __post_init__(self):
        self.accuracies.flags.writeable = False

    @property
    def max_rank(self) -> int:
        return int(self.accuracies.shape[0])

    def at_rank(self, k: int) -> float:
        return float(self.accuracies[k - 1])

    def to_csv(self, path: str | Path) -> None:
        with Path(path).open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["rank", "accuracy"])
            for k, acc in enumerate(self.accuracies, start=1):
                writer.writerow([k, repr(float(acc))])


def genuine_ranks(fused: FusedScores) -> np.ndarray:
    """Rank of each probe's genuine mate in its gallery, pessimistic ties.

    rank = 1 + number of impostor scores >= the genuine score, so an
    impostor tying the genuine score pushes the mate down.
    """
    order = np.argsort(fused.probe_ids, kind="stable")
    probe_sorted = fused.probe_ids[order]
    labels_sorted = fused.labels[order]
    scores_sorted = fused.scores[order]
    boundaries = np.r_[0, 1 + np.flatnonzero(probe_sorted[1:] != probe_sorted[:-1]),
                       probe_sorted.size]
    ranks = np.empty(boundaries.size - 1, dtype=np.int64)
    for g in range(ranks.size):
        lo, hi = boundaries[g], boundaries[g + 1]
        genuine_here = np.flatnonzero(labels_sorted[lo:hi])
        probe = probe_sorted[lo]
        if genuine_here.size == 0:
            raise ProbeWithoutMate(f"probe {probe!r} has no genuine gallery entry")
        if genuine_here.size > 1:
            raise ProbeWithMultipleMates(
                f"probe {probe!r} has {genuine_here.size} genuine gallery entries"
            )
        gen_score = scores_sorted[lo + genuine_here[0]]
        impostors = scores_sorted[lo:hi][~labels_sorted[lo:hi]]
        ranks[g] = 1 + int((impostors >= gen_score).sum())
    return ranks


def cmc(fused: FusedScores, max_rank: int) -> CmcCurve:
    """Identification accuracy at ranks 1..max_rank."""
    if max_rank < 1:
        raise ValueError(f"max_rank must be >= 1, got {max_rank}")
    ranks = genuine_ranks(fused)
    ks = np.arange(1, max_rank + 1)
    accuracies = (ranks[None, :] <= ks[:, None]).mean(axis=1)
    return CmcCurve(accuracies=accuracies, probe_count=int(ranks.size))


def cmc_with_dropped_probes(fused: FusedScores, all_probe_ids, max_rank: int) -> CmcCurve:
    """CMC where probes absent from `fused` (or left without their genuine
    mate, e.g. by listwise deletion) count as misses at every rank."""
    total = len(set(all_probe_ids))
    order = np.argsort(fused.probe_ids, kind="stable")
    probe_sorted = fused.probe_ids[order]
    labels_sorted = fused.labels[order]
    scores_sorted = fused.scores[order]
    boundaries = np.r_[0, 1 + np.flatnonzero(probe_sorted[1:] != probe_sorted[:-1]),
                       probe_sorted.size]
    hits = np.zeros(max_rank, dtype=np.int64)
    for g in range(boundaries.size - 1):
        lo, hi = boundaries[g], boundaries[g + 1]
        genuine_here = np.flatnonzero(labels_sorted[lo:hi])
        if genuine_here.size != 1:
            continue  # no or ambiguous mate -> permanent miss
        gen_score = scores_sorted[lo + genuine_here[0]]
        impostors = scores_sorted[lo:hi][~labels_sorted[lo:hi]]
        rank = 1 + int((impostors >= gen_score).sum())
        if rank <= max_rank:
            hits[rank - 1:] += 1
    if total == 0:
        raise ProbeWithoutMate("no probes to evaluate")
    return CmcCurve(accuracies=hits / total, probe_count=total)


def write_fused_csv(fused: FusedScores, path: str | Path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["probe_id", "gallery_id", "label", "fused_score"])
        for i in range(fused.n_rows):
            writer.writerow([
                fused.probe_ids[i],
                fused.gallery_ids[i],
                "genuine" if fused.labels[i] else "impostor",
                repr(float(fused.scores[i])),
            ])


def read_fused_csv(path: str | Path, provenance: str = PROVENANCE_COMPLETE) -> FusedScores:
    probes, galleries, labels, scores = [], [], [], []
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["probe_id", "gallery_id", "label", "fused_score"]:
            raise MalformedLine(f"{path}: expected fused-score header")
        for fields in reader:
            if not fields:
                continue
            probes.append(fields[0])
            galleries.append(fields[1])
            labels.append(fields[2] == "genuine")
            scores.append(float(fields[3]))
    return FusedScores(
        probe_ids=np.array(probes, dtype=object),
        gallery_ids=np.array(galleries, dtype=object),
        labels=np.array(labels, dtype=bool),
        scores=np.array(scores, dtype=np.float64),
        provenance=provenance,
    )
