"""Read and write score tables in three file formats.

- long CSV (canonical interchange): ``probe_id,gallery_id,modality,score``,
  one present score per line; absent lines are missing cells.
- wide CSV: ``probe_id,gallery_id,<mod1>,...,<modN>``, empty field = missing.
- matrix set: one whitespace-separated square similarity matrix per modality
  (the NIST BSSR1 layout); row i = probe i, column j = gallery j, diagonal
  cells are the genuine comparisons.

Scores serialize via repr() so every float round-trips bit-exactly.
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import (
    DuplicateCell,
    InventoryMismatch,
    IoFailure,
    MalformedLine,
    NonNumericScore,
    RaggedRow,
    ShapeMismatch,
    UnknownModality,
)
from .model import ModalitySet, ScoreTable, build_table

LONG_CSV = "long_csv"
WIDE_CSV = "wide_csv"
BSSR1_MATRIX_SET = "bssr1_matrix_set"
FORMATS = (LONG_CSV, WIDE_CSV, BSSR1_MATRIX_SET)

LONG_HEADER = ["probe_id", "gallery_id", "modality", "score"]

# Published score inventory of NIST BSSR1 Set 1 (517-identity gallery,
# four modalities).
BSSR1_SET1_INVENTORY = {
    "scores_per_modality": 267_289,
    "genuine_per_modality": 517,
    "impostor_per_modality": 266_772,
    "total_scores": 1_069_156,
}


def read_long_csv(path: str | Path, modalities: Sequence[str] | None = None) -> ScoreTable:
    """Parse the canonical long format.

    Modalities are taken from `modalities` when given (column order), else
    inferred in order of first appearance in the file.
    """
    path = Path(path)
    cells: dict[tuple[str, str], dict[str, float]] = {}
    seen_mods: list[str] = []
    allowed = set(modalities) if modalities is not None else None

    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != LONG_HEADER:
            raise MalformedLine(f"{path}:1: expected header {','.join(LONG_HEADER)}")
        for lineno, fields in enumerate(reader, start=2):
            if not fields:
                continue
            if len(fields) != 4:
                raise MalformedLine(f"{path}:{lineno}: expected 4 fields, got {len(fields)}")
            probe, gallery, mod, raw = fields
            if allowed is not None and mod not in allowed:
                raise UnknownModality(f"{path}:{lineno}: unknown modality {mod!r}")
            try:
                score = float(raw)
            except ValueError:
                raise MalformedLine(f"{path}:{lineno}: bad score {raw!r}") from None
            key = (probe, gallery)
            row = cells.setdefault(key, {})
            if mod in row:
                raise DuplicateCell(f"{path}:{lineno}: duplicate cell ({probe},{gallery},{mod})")
            row[mod] = score
            if mod not in seen_mods:
                seen_mods.append(mod)

    names = tuple(modalities) if modalities is not None else tuple(seen_mods)
    if not names:
        raise MalformedLine(f"{path}: no modalities found and none supplied")
    mods = ModalitySet(names)
    records = [
        (p, g, [row.get(m) for m in names])
        for (p, g), row in cells.items()
    ]
    return build_table(mods, records)


def read_wide_csv(path: str | Path) -> ScoreTable:
    """Parse the wide format; empty fields are missing cells."""
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or len(header) < 3 or header[:2] != ["probe_id", "gallery_id"]:
            raise MalformedLine(f"{path}:1: expected header probe_id,gallery_id,<modalities...>")
        mods = ModalitySet(tuple(header[2:]))
        n_fields = 2 + mods.count
        records = []
        for lineno, fields in enumerate(reader, start=2):
            if not fields:
                continue
            if len(fields) != n_fields:
                raise RaggedRow(f"{path}:{lineno}: expected {n_fields} fields, got {len(fields)}")
            scores: list[float | None] = []
            for j, raw in enumerate(fields[2:]):
                if raw == "":
                    scores.append(None)
                    continue
                try:
                    scores.append(float(raw))
                except ValueError:
                    raise NonNumericScore(
                        f"{path}:{lineno}: bad score {raw!r} for {mods.names[j]!r}"
                    ) from None
            records.append((fields[0], fields[1], scores))
    return build_table(mods, records)


def read_bssr1_matrix_set(
    paths: Sequence[str | Path],
    modality_names: Sequence[str] | None = None,
    gallery_size: int | None = None,
    expected_inventory: dict | None = None,
) -> ScoreTable:
    """Assemble one table from per-modality square similarity matrices.

    Identities are named s1..sM for both probes and galleries, so diagonal
    rows come out genuine. When `expected_inventory` is given (see
    BSSR1_SET1_INVENTORY) the assembled counts must match it exactly.
    """
    paths = [Path(p) for p in paths]
    if modality_names is None:
        modality_names = [p.stem for p in paths]
    if len(modality_names) != len(paths):
        raise ShapeMismatch(f"{len(paths)} files but {len(modality_names)} modality names")
    mods = ModalitySet(tuple(modality_names))

    matrices = []
    size = gallery_size
    for path in paths:
        rows = []
        with path.open(encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    rows.append([float(tok) for tok in line.split()])
                except ValueError:
                    raise MalformedLine(f"{path}:{lineno}: non-numeric entry") from None
        if not rows:
            raise ShapeMismatch(f"{path}: empty matrix")
        if size is None:
            size = len(rows[0])
        for lineno, row in enumerate(rows, start=1):
            if len(row) != size:
                raise ShapeMismatch(f"{path}: row {lineno} has {len(row)} columns, expected {size}")
        if len(rows) != size:
            raise ShapeMismatch(f"{path}: {len(rows)} rows for gallery size {size}")
        matrices.append(np.asarray(rows, dtype=np.float64))

    ids = [f"s{i + 1}" for i in range(size)]
    n = size * size
    probe_idx = np.repeat(np.arange(size), size)
    gallery_idx = np.tile(np.arange(size), size)
    scores = np.column_stack([m.reshape(n) for m in matrices])
    table = ScoreTable(
        modalities=mods,
        probe_ids=np.array([ids[i] for i in probe_idx], dtype=object),
        gallery_ids=np.array([ids[j] for j in gallery_idx], dtype=object),
        labels=probe_idx == gallery_idx,
        scores=np.ascontiguousarray(scores),
        normalized=False,
    )
    if expected_inventory is not None:
        validate_inventory(table, expected_inventory)
    return table


def validate_inventory(table: ScoreTable, expected: dict) -> None:
    """Check per-modality and total score counts against a known inventory."""
    present = table.present
    per_modality = present.sum(axis=0)
    genuine = present[table.labels].sum(axis=0)
    impostor = present[~table.labels].sum(axis=0)
    checks = {
        "scores_per_modality": per_modality,
        "genuine_per_modality": genuine,
        "impostor_per_modality": impostor,
    }
    for key, counts in checks.items():
        want = expected.get(key)
        if want is None:
            continue
        for name, got in zip(table.modalities.names, counts):
            if int(got) != want:
                raise InventoryMismatch(f"{key} for {name!r}: got {int(got)}, expected {want}")
    want_total = expected.get("total_scores")
    if want_total is not None and int(present.sum()) != want_total:
        raise InventoryMismatch(f"total_scores: got {int(present.sum())}, expected {want_total}")


def write_table(table: ScoreTable, fmt: str, path: str | Path) -> None:
    """Serialize a table; read(write(table)) reproduces every score bit-exactly."""
    if fmt not in FORMATS:
        raise IoFailure(f"unknown format {fmt!r}; choose one of {FORMATS}")
    path = Path(path)
    try:
        if fmt == LONG_CSV:
            _write_long(table, path)
        elif fmt == WIDE_CSV:
            _write_wide(table, path)
        else:
            _write_matrix_set(table, path)
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def read_table(fmt: str, path: str | Path, **kwargs) -> ScoreTable:
    """Dispatch on format tag; matrix-set paths may be a directory."""
    if fmt == LONG_CSV:
        return read_long_csv(path, **kwargs)
    if fmt == WIDE_CSV:
        return read_wide_csv(path)
    if fmt == BSSR1_MATRIX_SET:
        p = Path(path)
        if p.is_dir():
            files = sorted(p.glob("*.txt"))
            if not files:
                raise IoFailure(f"no .txt matrix files in {p}")
            return read_bssr1_matrix_set(files, **kwargs)
        return read_bssr1_matrix_set([p], **kwargs)
    raise IoFailure(f"unknown format {fmt!r}; choose one of {FORMATS}")


def _write_long(table: ScoreTable, path: Path) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(LONG_HEADER)
        present = table.present
        for i in range(table.n_rows):
            for j in np.flatnonzero(present[i]):
                writer.writerow(
                    [table.probe_ids[i], table.gallery_ids[i],
                     table.modalities.names[j], repr(float(table.scores[i, j]))]
                )


def _write_wide(table: ScoreTable, path: Path) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["probe_id", "gallery_id", *table.modalities.names])
        for i in range(table.n_rows):
            fields = [table.probe_ids[i], table.gallery_ids[i]]
            for v in table.scores[i]:
                fields.append("" if np.isnan(v) else repr(float(v)))
            writer.writerow(fields)


def _write_matrix_set(table: ScoreTable, directory: Path) -> None:
    """One <modality>.txt per modality; requires a complete square cross table."""
    ids = sorted(set(table.probe_ids), key=_id_sort_key)
    m = len(ids)
    if table.n_rows != m * m:
        raise ShapeMismatch(f"need a full {m}x{m} cross, have {table.n_rows} rows")
    if not table.present.all():
        raise ShapeMismatch("matrix format cannot represent missing cells")
    pos = {pid: k for k, pid in enumerate(ids)}
    grid = np.full((m, m, table.modalities.count), np.nan)
    for i in range(table.n_rows):
        grid[pos[table.probe_ids[i]], pos[table.gallery_ids[i]]] = table.scores[i]
    if np.isnan(grid).any():
        raise ShapeMismatch("rows do not cover the full probe x gallery cross")
    directory.mkdir(parents=True, exist_ok=True)
    for j, name in enumerate(table.modalities.names):
        with (directory / f"{name}.txt").open("w", encoding="utf-8") as fh:
            for r in range(m):
                fh.write(" ".join(repr(float(v)) for v in grid[r, :, j]))
                fh.write("\n")


def _id_sort_key(pid: str):
    # s1..sM ids sort numerically; anything else falls back to lexicographic.
    pid = str(pid)
    if pid.startswith("s") and pid[1:].isdigit():
        return (0, int(pid[1:]), pid)
    return (1, 0, pid)
