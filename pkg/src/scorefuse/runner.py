"""Experiment grid orchestration: scenario x missing level x repetition x
method, with mean +/- s.d. aggregation over repetitions.

Per repetition the probe split and the normalization fit are computed once
and shared by every method, so methods are always compared on identical
masks. Seeds are derived positionally from the master seed, never consumed
sequentially; deleting a level or repetition from the grid leaves every
other cell's numbers untouched.
"""

from __future__ import annotations

import csv
import hashlib
import io as _stdio
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import io as table_io
from . import normalize, synth
from .errors import ConfigError, GridCellError, ScoreFuseError
from .imputation import (
    ITERATIVE,
    ImputerSpec,
    MEAN,
    MEDIAN,
    apply_iterative,
    fit_iterative,
    impute_mean,
    impute_median,
    listwise_delete,
)
from .metrics import (
    PROVENANCE_LISTWISE,
    cmc,
    cmc_with_dropped_probes,
    fuse_simple_sum,
    roc,
)
from .model import ModalitySet, ScoreTable, split_by_probe
from .scenarios import (
    ADD_MODALITY,
    MERGE,
    RETIRE,
    Scenario,
    apply_plan,
    plan_add_modality,
    plan_merge,
    plan_retire,
)
from .util import mix_seed

# seed-derivation roles, mixed in after the master seed
_ROLE_SPLIT = 1
_ROLE_MASK = 2

NO_IMPUTATION = "no_imputation"
LISTWISE_BASELINE = "listwise"
RETRAIN = "retrain"
COMPLETE = "complete"

DEFAULT_LEVELS = (0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)
DEFAULT_FPR_GRID = (0.001, 0.01, 0.1)

REPORT_SCHEMA = "scorefuse-report/1"


@dataclass(frozen=True)
class MethodEntry:
    """One column of the comparison: a baseline or an imputer spec."""

    name: str
    spec: ImputerSpec | None = None  # None for baselines

    @property
    def is_baseline(self) -> bool:
        return self.spec is None


def _parse_method(entry) -> MethodEntry:
    if isinstance(entry, str):
        if entry in (NO_IMPUTATION, LISTWISE_BASELINE, RETRAIN):
            return MethodEntry(name=entry)
        if entry in (MEAN, MEDIAN):
            return MethodEntry(name=entry, spec=ImputerSpec(method=entry))
        if entry.startswith("iterative_"):
            spec = ImputerSpec(method=ITERATIVE, regressor=entry[len("iterative_"):])
            return MethodEntry(name=spec.name, spec=spec)
        raise ConfigError(f"unknown imputer entry {entry!r}")
    if isinstance(entry, dict):
        try:
            spec = ImputerSpec.from_dict(entry)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if spec.method == "listwise":
            return MethodEntry(name=LISTWISE_BASELINE)
        return MethodEntry(name=spec.name, spec=spec)
    raise ConfigError(f"imputer entry must be a string or object, got {type(entry).__name__}")


def default_roster(scenario_kind: str) -> tuple:
    names = [NO_IMPUTATION, LISTWISE_BASELINE, MEAN, MEDIAN,
             "iterative_bayesian_ridge", "iterative_cart", "iterative_knn"]
    if scenario_kind == RETIRE:
        names.append(RETRAIN)
    return tuple(_parse_method(n) for n in names)


def _method_to_config(entry: MethodEntry):
    """Name string when the spec carries only defaults, else the spec object."""
    if entry.spec is None:
        return entry.name
    spec_dict = entry.spec.to_dict()
    if set(spec_dict) <= {"method", "regressor"}:
        return entry.name
    return spec_dict


@dataclass(frozen=True)
class DatasetConfig:
    synth_spec: synth.SynthSpec | None = None
    file_format: str | None = None
    path: str | None = None
    paths: tuple[str, ...] | None = None
    modality_names: tuple[str, ...] | None = None
    gallery_size: int | None = None
    validate_inventory: bool = False

    def load(self) -> ScoreTable:
        if self.synth_spec is not None:
            return synth.generate(self.synth_spec)
        if self.file_format == table_io.BSSR1_MATRIX_SET:
            expected = table_io.BSSR1_SET1_INVENTORY if self.validate_inventory else None
            return table_io.read_bssr1_matrix_set(
                self.paths,
                modality_names=self.modality_names,
                gallery_size=self.gallery_size,
                expected_inventory=expected,
            )
        if self.file_format == table_io.LONG_CSV:
            return table_io.read_long_csv(self.path, modalities=self.modality_names)
        if self.file_format == table_io.WIDE_CSV:
            return table_io.read_wide_csv(self.path)
        raise ConfigError(f"dataset has no source (format {self.file_format!r})")

    def to_dict(self) -> dict:
        if self.synth_spec is not None:
            return {"synth": self.synth_spec.to_dict()}
        files = {"format": self.file_format}
        if self.path is not None:
            files["path"] = self.path
        if self.paths is not None:
            files["paths"] = list(self.paths)
        if self.modality_names is not None:
            files["modalities"] = list(self.modality_names)
        if self.gallery_size is not None:
            files["gallery_size"] = self.gallery_size
        if self.validate_inventory:
            files["validate_inventory"] = True
        return {"files": files}

    @classmethod
    def from_dict(cls, data: dict) -> "DatasetConfig":
        unknown = set(data) - {"synth", "files"}
        if unknown:
            raise ConfigError(f"unknown dataset keys: {sorted(unknown)}")
        if ("synth" in data) == ("files" in data):
            raise ConfigError("dataset needs exactly one of 'synth' or 'files'")
        if "synth" in data:
            try:
                return cls(synth_spec=synth.SynthSpec.from_dict(data["synth"]))
            except ScoreFuseError as exc:
                raise ConfigError(f"bad synth spec: {exc}") from exc
        files = data["files"]
        allowed = {"format", "path", "paths", "modalities", "gallery_size", "validate_inventory"}
        unknown = set(files) - allowed
        if unknown:
            raise ConfigError(f"unknown dataset.files keys: {sorted(unknown)}")
        fmt = files.get("format")
        if fmt not in table_io.FORMATS:
            raise ConfigError(f"dataset.files.format must be one of {table_io.FORMATS}")
        if fmt == table_io.BSSR1_MATRIX_SET:
            if "paths" not in files:
                raise ConfigError("bssr1_matrix_set dataset needs 'paths'")
        elif "path" not in files:
            raise ConfigError(f"{fmt} dataset needs 'path'")
        return cls(
            file_format=fmt,
            path=files.get("path"),
            paths=tuple(files["paths"]) if "paths" in files else None,
            modality_names=tuple(files["modalities"]) if "modalities" in files else None,
            gallery_size=files.get("gallery_size"),
            validate_inventory=bool(files.get("validate_inventory", False)),
        )


@dataclass(frozen=True)
class ExperimentConfig:
    dataset: DatasetConfig
    scenario: Scenario
    missing_levels: tuple[float, ...] = DEFAULT_LEVELS
    repetitions: int = 5
    split_fraction: float = 0.8
    master_seed: int = 0
    methods: tuple[MethodEntry, ...] = ()
    max_rank: int = 10
    fpr_grid: tuple[float, ...] = DEFAULT_FPR_GRID
    output_dir: str | None = None

    def __post_init__(self):
        if self.repetitions < 1:
            raise ConfigError(f"repetitions must be >= 1, got {self.repetitions}")
        if not 0.0 < self.split_fraction < 1.0:
            raise ConfigError(f"split_fraction must be in (0, 1), got {self.split_fraction}")
        levels = tuple(float(v) for v in self.missing_levels)
        if not levels:
            raise ConfigError("missing_levels must not be empty")
        if any(not 0.0 <= v <= 1.0 for v in levels):
            raise ConfigError("missing levels must lie in [0, 1]")
        if list(levels) != sorted(levels):
            raise ConfigError("missing_levels must be sorted ascending")
        object.__setattr__(self, "missing_levels", levels)
        if not self.methods:
            object.__setattr__(self, "methods", default_roster(self.scenario.kind))
        if len({m.name for m in self.methods}) != len(self.methods):
            raise ConfigError("duplicate method names in the imputer roster")
        if any(m.name == RETRAIN for m in self.methods) and self.scenario.kind != RETIRE:
            raise ConfigError("the retrain baseline only applies to the retire scenario")
        if self.max_rank < 1:
            raise ConfigError("eval.max_rank must be >= 1")

    def to_dict(self) -> dict:
        out = {
            "dataset": self.dataset.to_dict(),
            "scenario": self.scenario.kind,
            "missing_levels": list(self.missing_levels),
            "repetitions": self.repetitions,
            "split_fraction": self.split_fraction,
            "master_seed": self.master_seed,
            "imputers": [_method_to_config(m) for m in self.methods],
            "eval": {"max_rank": self.max_rank, "fpr_grid": list(self.fpr_grid)},
        }
        if self.scenario.target_modality is not None:
            out["target_modality"] = self.scenario.target_modality
        if self.output_dir is not None:
            out["output_dir"] = self.output_dir
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        allowed = {"dataset", "scenario", "target_modality", "missing_levels", "repetitions",
                   "split_fraction", "master_seed", "imputers", "eval", "output_dir"}
        unknown = set(data) - allowed
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        for key in ("dataset", "scenario"):
            if key not in data:
                raise ConfigError(f"config is missing required key {key!r}")
        try:
            scenario = Scenario(data["scenario"], data.get("target_modality"))
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        eval_cfg = data.get("eval", {})
        unknown = set(eval_cfg) - {"max_rank", "fpr_grid"}
        if unknown:
            raise ConfigError(f"unknown eval keys: {sorted(unknown)}")
        methods = tuple(_parse_method(e) for e in data["imputers"]) if "imputers" in data else ()
        return cls(
            dataset=DatasetConfig.from_dict(data["dataset"]),
            scenario=scenario,
            missing_levels=tuple(data.get("missing_levels", DEFAULT_LEVELS)),
            repetitions=int(data.get("repetitions", 5)),
            split_fraction=float(data.get("split_fraction", 0.8)),
            master_seed=int(data.get("master_seed", 0)),
            methods=methods,
            max_rank=int(eval_cfg.get("max_rank", 10)),
            fpr_grid=tuple(float(f) for f in eval_cfg.get("fpr_grid", DEFAULT_FPR_GRID)),
            output_dir=data.get("output_dir"),
        )

    @classmethod
    def from_json_file(cls, path: str | Path) -> "ExperimentConfig":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: config must be a JSON object")
        return cls.from_dict(data)

    def config_hash(self) -> str:
        canonical = json.dumps(self.to_dict(), sort_keys=True)
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class EvalReport:
    data: dict

    def to_json(self) -> str:
        return json.dumps(self.data, indent=2, sort_keys=True) + "\n"

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json(), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "EvalReport":
        return cls(data=json.loads(Path(path).read_text(encoding="utf-8")))

    @property
    def cells(self) -> list[dict]:
        return self.data["cells"]

    @property
    def summary(self) -> list[dict]:
        return self.data["summary"]

    def summary_row(self, level: float, method: str) -> dict:
        for row in self.summary:
            if row["method"] == method and row["level"] == level:
                return row
        raise KeyError(f"no summary row for level={level} method={method}")


def _evaluate(fused, max_rank: int, fpr_grid, cmc_curve=None):
    curve = roc(fused)
    if cmc_curve is None:
        cmc_curve = cmc(fused, max_rank)
    tprs = curve.tpr_at_fpr(np.asarray(fpr_grid))
    metrics = {
        "auc": curve.auc,
        "eer": curve.eer,
        "tpr_at_fpr": {f"{f:g}": float(t) for f, t in zip(fpr_grid, tprs)},
        "rank": [float(a) for a in cmc_curve.accuracies],
    }
    return metrics, curve, cmc_curve


def _drop_column(table: ScoreTable, col: int) -> ScoreTable:
    names = tuple(n for j, n in enumerate(table.modalities.names) if j != col)
    return ScoreTable(
        modalities=ModalitySet(names),
        probe_ids=table.probe_ids,
        gallery_ids=table.gallery_ids,
        labels=table.labels,
        scores=np.ascontiguousarray(np.delete(table.scores, col, axis=1)),
        normalized=table.normalized,
    )


class _Runner:
    def __init__(self, config: ExperimentConfig, out_dir: Path | None, jobs: int):
        self.config = config
        self.out_dir = out_dir
        self.cells_dir = out_dir / "cells" if out_dir else None
        self.jobs = jobs
        self.table = config.dataset.load()
        if config.scenario.target_modality is not None:
            self.table.modalities.index(config.scenario.target_modality)  # raises if unknown

    def run(self) -> EvalReport:
        if self.cells_dir:
            self.cells_dir.mkdir(parents=True, exist_ok=True)
        cfg = self.config

        # Split + normalization are per repetition, shared across the grid.
        self.preps = [self._prepare_rep(rep) for rep in range(cfg.repetitions)]

        tasks = [(rep, None) for rep in range(cfg.repetitions)]
        tasks += [
            (rep, level)
            for level in cfg.missing_levels
            for rep in range(cfg.repetitions)
        ]
        if self.jobs > 1:
            with ThreadPoolExecutor(max_workers=self.jobs) as pool:
                chunks = list(pool.map(self._run_task, tasks))
        else:
            chunks = [self._run_task(t) for t in tasks]

        cells = [cell for chunk in chunks for cell in chunk]
        cells.sort(key=self._cell_sort_key)
        report = EvalReport(data={
            "schema": REPORT_SCHEMA,
            "config": cfg.to_dict(),
            "config_hash": cfg.config_hash(),
            "modalities": list(self.table.modalities.names),
            "methods": [m.name for m in cfg.methods],
            "cells": cells,
            "summary": _aggregate(cells, cfg),
        })
        if self.out_dir:
            report.save(self.out_dir / "report.json")
            (self.out_dir / "summary.csv").write_text(
                summarize(report, "csv"), encoding="utf-8")
            (self.out_dir / "summary.txt").write_text(
                summarize(report, "text"), encoding="utf-8")
        return report

    def _cell_sort_key(self, cell):
        method_order = {m.name: i for i, m in enumerate(self.config.methods)}
        method_order[COMPLETE] = -1
        return (cell["level"], cell["rep"], method_order[cell["method"]])

    def _prepare_rep(self, rep: int):
        cfg = self.config
        split_seed = mix_seed(cfg.master_seed, _ROLE_SPLIT, rep)
        split = split_by_probe(self.table, cfg.split_fraction, split_seed)
        train_mask = split.train_mask(self.table)
        params = normalize.fit(self.table, train_mask)
        normed = normalize.transform(self.table, params)
        return {
            "split_seed": split_seed,
            "split": split,
            "train_mask": train_mask,
            "test_mask": split.test_mask(self.table),
            "normed": normed,
        }

    def _run_task(self, task) -> list[dict]:
        rep, level = task
        if level is None:
            return [self._complete_cell(rep)]
        return self._level_cells(rep, level)

    def _complete_cell(self, rep: int) -> dict:
        prep = self.preps[rep]
        try:
            fused = fuse_simple_sum(prep["normed"].select(prep["test_mask"]))
            metrics, curve, cmc_curve = _evaluate(
                fused, self.config.max_rank, self.config.fpr_grid)
        except ScoreFuseError as exc:
            raise GridCellError(f"baseline rep={rep}: {exc}") from exc
        self._write_curves(0.0, rep, COMPLETE, curve, cmc_curve)
        return {
            "level": 0.0,
            "rep": rep,
            "method": COMPLETE,
            "split_seed": prep["split_seed"],
            "mask_seed": None,
            "metrics": metrics,
            "convergence": None,
        }

    def _build_plan(self, rep: int, level: float):
        cfg = self.config
        prep = self.preps[rep]
        seed = mix_seed(cfg.master_seed, _ROLE_MASK, int(round(level * 1000)), rep)
        kind = cfg.scenario.kind
        if kind == ADD_MODALITY:
            plan = plan_add_modality(prep["normed"], cfg.scenario.target_modality, level, seed)
        elif kind == MERGE:
            plan = plan_merge(prep["normed"], level, seed)
        else:
            plan = plan_retire(prep["normed"], prep["split"],
                               cfg.scenario.target_modality, level, seed)
        return plan, seed

    def _level_cells(self, rep: int, level: float) -> list[dict]:
        cfg = self.config
        prep = self.preps[rep]
        try:
            plan, mask_seed = self._build_plan(rep, level)
            masked = apply_plan(prep["normed"], plan)
        except ScoreFuseError as exc:
            raise GridCellError(f"level={level:g} rep={rep} (masking): {exc}") from exc

        cells = []
        for entry in cfg.methods:
            try:
                metrics, convergence, curve, cmc_curve = self._run_method(
                    entry, masked, prep)
            except ScoreFuseError as exc:
                raise GridCellError(
                    f"level={level:g} rep={rep} method={entry.name}: {exc}") from exc
            self._write_curves(level, rep, entry.name, curve, cmc_curve)
            cells.append({
                "level": level,
                "rep": rep,
                "method": entry.name,
                "split_seed": prep["split_seed"],
                "mask_seed": mask_seed,
                "metrics": metrics,
                "convergence": convergence,
            })
        return cells

    def _run_method(self, entry: MethodEntry, masked: ScoreTable, prep):
        cfg = self.config
        test_mask = prep["test_mask"]
        convergence = None

        if entry.name == NO_IMPUTATION:
            fused = fuse_simple_sum(masked.select(test_mask), skip_missing=True)
            metrics, curve, cmc_curve = _evaluate(fused, cfg.max_rank, cfg.fpr_grid)
        elif entry.name == LISTWISE_BASELINE:
            test_table = masked.select(test_mask)
            survivors = listwise_delete(test_table)
            fused = fuse_simple_sum(survivors, provenance=PROVENANCE_LISTWISE)
            cmc_curve = cmc_with_dropped_probes(
                fused, set(test_table.probe_ids), cfg.max_rank)
            metrics, curve, cmc_curve = _evaluate(
                fused, cfg.max_rank, cfg.fpr_grid, cmc_curve=cmc_curve)
        elif entry.name == RETRAIN:
            col = masked.modalities.index(cfg.scenario.target_modality)
            reduced = _drop_column(masked.select(test_mask), col)
            fused = fuse_simple_sum(reduced, skip_missing=True)
            metrics, curve, cmc_curve = _evaluate(fused, cfg.max_rank, cfg.fpr_grid)
        elif entry.spec.method in (MEAN, MEDIAN):
            impute = impute_mean if entry.spec.method == MEAN else impute_median
            filled, _ = impute(masked, prep["train_mask"])
            fused = fuse_simple_sum(
                filled.select(test_mask), provenance=f"imputed:{entry.name}")
            metrics, curve, cmc_curve = _evaluate(fused, cfg.max_rank, cfg.fpr_grid)
        else:
            fitted = fit_iterative(masked, prep["train_mask"], entry.spec)
            filled = apply_iterative(masked.select(test_mask), fitted)
            fused = fuse_simple_sum(filled, provenance=f"imputed:{entry.name}")
            metrics, curve, cmc_curve = _evaluate(fused, cfg.max_rank, cfg.fpr_grid)
            convergence = {
                "iterations_run": fitted.iterations_run,
                "final_max_delta": fitted.final_max_delta,
                "converged": fitted.converged,
            }
        return metrics, convergence, curve, cmc_curve

    def _write_curves(self, level, rep, method, curve, cmc_curve):
        if not self.cells_dir:
            return
        stem = f"{level:g}_{rep}_{method}"
        curve.to_csv(self.cells_dir / f"roc_{stem}.csv")
        cmc_curve.to_csv(self.cells_dir / f"cmc_{stem}.csv")


def run(config: ExperimentConfig, out_dir: str | Path | None = None, jobs: int | None = None) -> EvalReport:
    """Execute the full grid and return (and optionally write) the report."""
    if out_dir is None and config.output_dir is not None:
        out_dir = config.output_dir
    out_path = Path(out_dir) if out_dir is not None else None
    if out_path:
        out_path.mkdir(parents=True, exist_ok=True)
    if jobs is None:
        jobs = os.cpu_count() or 1
    return _Runner(config, out_path, max(1, int(jobs))).run()


def _aggregate(cells: list[dict], cfg: ExperimentConfig) -> list[dict]:
    """Mean and sample (n-1) standard deviation over repetitions."""
    groups: dict[tuple, list[dict]] = {}
    order: list[tuple] = []
    for cell in cells:
        key = (cell["level"], cell["method"])
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append(cell["metrics"])
    out = []
    for key in order:
        level, method = key
        reps = groups[key]
        out.append({
            "level": level,
            "method": method,
            "repetitions": len(reps),
            "mean": _reduce(reps, np.mean),
            "sd": _reduce(reps, _sample_sd),
        })
    return out


def _sample_sd(values) -> float:
    arr = np.asarray(values, dtype=np.float64)
    if arr.size <= 1:
        return 0.0
    return float(arr.std(ddof=1))


def _reduce(metric_dicts: list[dict], fn) -> dict:
    fprs = metric_dicts[0]["tpr_at_fpr"].keys()
    n_ranks = len(metric_dicts[0]["rank"])
    return {
        "auc": float(fn([m["auc"] for m in metric_dicts])),
        "eer": float(fn([m["eer"] for m in metric_dicts])),
        "tpr_at_fpr": {
            f: float(fn([m["tpr_at_fpr"][f] for m in metric_dicts])) for f in fprs
        },
        "rank": [
            float(fn([m["rank"][k] for m in metric_dicts])) for k in range(n_ranks)
        ],
    }


def summarize(report: EvalReport, fmt: str = "text") -> str:
    """Render per-level method tables from a report's summary rows."""
    if fmt not in ("text", "csv"):
        raise ConfigError(f"summarize format must be 'text' or 'csv', got {fmt!r}")
    summary = report.summary
    fprs = list(summary[0]["mean"]["tpr_at_fpr"].keys()) if summary else []
    n_ranks = len(summary[0]["mean"]["rank"]) if summary else 0
    show_ranks = list(range(1, min(3, n_ranks) + 1))

    if fmt == "csv":
        buf = _stdio.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        header = ["level", "method", "repetitions", "auc_mean", "auc_sd", "eer_mean", "eer_sd"]
        header += [f"tpr@{f}_{s}" for f in fprs for s in ("mean", "sd")]
        header += [f"rank{k}_{s}" for k in range(1, n_ranks + 1) for s in ("mean", "sd")]
        writer.writerow(header)
        for row in summary:
            fields = [f"{row['level']:g}", row["method"], row["repetitions"],
                      repr(row["mean"]["auc"]), repr(row["sd"]["auc"]),
                      repr(row["mean"]["eer"]), repr(row["sd"]["eer"])]
            for f in fprs:
                fields += [repr(row["mean"]["tpr_at_fpr"][f]), repr(row["sd"]["tpr_at_fpr"][f])]
            for k in range(n_ranks):
                fields += [repr(row["mean"]["rank"][k]), repr(row["sd"]["rank"][k])]
            writer.writerow(fields)
        return buf.getvalue()

    lines = []
    levels: list[float] = []
    for row in summary:
        if row["level"] not in levels:
            levels.append(row["level"])
    width = max((len(r["method"]) for r in summary), default=10) + 2
    col = 19
    for level in levels:
        rows = [r for r in summary if r["level"] == level]
        reps = rows[0]["repetitions"] if rows else 0
        lines.append(f"level {level:g}  ({reps} repetition{'s' if reps != 1 else ''})")
        header = "method".ljust(width) + "auc".ljust(col) + "eer".ljust(col)
        header += "".join(f"tpr@{f}".ljust(col) for f in fprs)
        header += "".join(f"rank{k}".ljust(col) for k in show_ranks)
        lines.append(header)
        for row in rows:
            mean, sd = row["mean"], row["sd"]
            row_cells = [
                _pm(mean["auc"], sd["auc"]),
                _pm(mean["eer"], sd["eer"]),
            ]
            row_cells += [_pm(mean["tpr_at_fpr"][f], sd["tpr_at_fpr"][f]) for f in fprs]
            row_cells += [_pm(mean["rank"][k - 1], sd["rank"][k - 1]) for k in show_ranks]
            lines.append(row["method"].ljust(width) + "".join(c.ljust(col) for c in row_cells))
        lines.append("")
    return "\n".join(lines)


def _pm(mean: float, sd: float) -> str:
    return f"{mean:.4f} +- {sd:.4f}"
