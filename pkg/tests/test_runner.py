import json

import numpy as np
import pytest

from scorefuse.errors import ConfigError, GridCellError
from scorefuse.runner import (
    DatasetConfig,
    EvalReport,
    ExperimentConfig,
    default_roster,
    run,
    summarize,
    _parse_method,
)
from scorefuse.scenarios import Scenario
from scorefuse.synth import uniform_spec

from conftest import mixed_quality_spec


def _config(scenario="merge", target=None, levels=(0.0, 0.4), reps=2, methods=None,
            n_identities=24, n_modalities=3, seed=31):
    return ExperimentConfig(
        dataset=DatasetConfig(synth_spec=uniform_spec(
            n_identities, n_modalities, genuine=(0.72, 0.12), impostor=(0.35, 0.12),
            correlation=0.6, seed=seed)),
        scenario=Scenario(scenario, target),
        missing_levels=levels,
        repetitions=reps,
        master_seed=99,
        methods=tuple(_parse_method(m) for m in methods) if methods else (),
    )


@pytest.fixture(scope="module")
def merge_report(tmp_path_factory):
    out = tmp_path_factory.mktemp("merge_run")
    cfg = _config(methods=("no_imputation", "listwise", "mean", "iterative_bayesian_ridge"))
    return run(cfg, out_dir=out, jobs=2), out, cfg


def test_config_json_round_trip(tmp_path):
    cfg = _config()
    data = cfg.to_dict()
    path = tmp_path / "config.json"
    path.write_text(json.dumps(data), encoding="utf-8")
    back = ExperimentConfig.from_json_file(path)
    assert back.to_dict() == data
    assert back.config_hash() == cfg.config_hash()


def test_config_rejects_unknown_keys(tmp_path):
    data = _config().to_dict()
    data["surprise"] = 1
    with pytest.raises(ConfigError, match="surprise"):
        ExperimentConfig.from_dict(data)
    data = _config().to_dict()
    data["eval"]["bogus"] = 2
    with pytest.raises(ConfigError, match="bogus"):
        ExperimentConfig.from_dict(data)
    data = _config().to_dict()
    data["dataset"]["synth"]["nope"] = 3
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict(data)


def test_config_validation_errors():
    with pytest.raises(ConfigError):
        _config(levels=())
    with pytest.raises(ConfigError):
        _config(levels=(0.4, 0.1))
    with pytest.raises(ConfigError):
        _config(levels=(0.5, 1.2))
    with pytest.raises(ConfigError):
        _config(reps=0)
    with pytest.raises(ConfigError):
        _config(methods=("mean", "mean"))
    with pytest.raises(ConfigError):
        _config(methods=("retrain",))  # retrain outside retire


def test_default_roster_includes_retrain_for_retire():
    names = [m.name for m in default_roster("retire")]
    assert names[-1] == "retrain"
    assert "iterative_knn" in names
    assert "retrain" not in [m.name for m in default_roster("merge")]


def test_level_zero_rows_match_complete_baseline(merge_report):
    report, _, _ = merge_report
    complete = {c["rep"]: json.dumps(c["metrics"], sort_keys=True)
                for c in report.cells if c["method"] == "complete"}
    zero_cells = [c for c in report.cells if c["level"] == 0.0 and c["method"] != "complete"]
    assert zero_cells
    for cell in zero_cells:
        assert json.dumps(cell["metrics"], sort_keys=True) == complete[cell["rep"]]


def test_report_structure_and_artifacts(merge_report):
    report, out, cfg = merge_report
    assert report.data["schema"] == "scorefuse-report/1"
    assert report.data["config_hash"] == cfg.config_hash()
    assert (out / "report.json").exists()
    assert (out / "summary.csv").exists()
    assert (out / "summary.txt").exists()
    # per-cell curve files, including the complete baseline
    assert (out / "cells" / "roc_0_0_complete.csv").exists()
    assert (out / "cells" / "cmc_0.4_1_mean.csv").exists()
    loaded = EvalReport.load(out / "report.json")
    assert loaded.to_json() == report.to_json()


def test_cells_carry_seeds_and_convergence(merge_report):
    report, _, _ = merge_report
    for cell in report.cells:
        assert "split_seed" in cell
        if cell["method"] == "complete":
            assert cell["mask_seed"] is None
        else:
            assert isinstance(cell["mask_seed"], int)
        if cell["method"].startswith("iterative"):
            assert set(cell["convergence"]) == {"iterations_run", "final_max_delta", "converged"}


def test_aggregation_matches_recomputation(merge_report):
    report, _, _ = merge_report
    row = report.summary_row(0.4, "mean")
    values = [c["metrics"]["auc"] for c in report.cells
              if c["level"] == 0.4 and c["method"] == "mean"]
    assert row["repetitions"] == len(values)
    assert row["mean"]["auc"] == float(np.mean(values))
    assert row["sd"]["auc"] == float(np.std(values, ddof=1))


def test_single_repetition_sd_is_zero():
    report = run(_config(reps=1, levels=(0.2,), methods=("mean",)), jobs=1)
    row = report.summary_row(0.2, "mean")
    assert row["sd"]["auc"] == 0.0
    assert all(v == 0.0 for v in row["sd"]["rank"])


def test_report_bytes_deterministic_across_jobs():
    cfg = _config(levels=(0.0, 0.3), methods=("no_imputation", "mean", "iterative_knn"))
    a = run(cfg, jobs=1).to_json()
    b = run(cfg, jobs=3).to_json()
    assert a == b


def test_cell_independence_when_levels_dropped():
    full = run(_config(levels=(0.0, 0.3), methods=("mean",)), jobs=1)
    only = run(_config(levels=(0.3,), methods=("mean",)), jobs=1)
    cells_full = {(c["rep"]): c for c in full.cells if c["level"] == 0.3 and c["method"] == "mean"}
    cells_only = {(c["rep"]): c for c in only.cells if c["level"] == 0.3 and c["method"] == "mean"}
    for rep, cell in cells_only.items():
        assert cell["metrics"] == cells_full[rep]["metrics"]
        assert cell["mask_seed"] == cells_full[rep]["mask_seed"]


def test_retire_run_has_retrain_and_masks_test_only():
    cfg = _config(scenario="retire", target="m2", levels=(0.0, 0.8),
                  methods=("no_imputation", "mean", "retrain"))
    report = run(cfg, jobs=2)
    methods = {c["method"] for c in report.cells}
    assert "retrain" in methods
    retrain_row = report.summary_row(0.8, "retrain")
    assert 0.0 <= retrain_row["mean"]["auc"] <= 1.0


def test_failed_cell_carries_provenance():
    # merge at level 0.8 with 3 modalities exceeds the feasibility bound (2/3)
    cfg = _config(levels=(0.8,), methods=("mean",))
    with pytest.raises(GridCellError, match=r"level=0.8 rep=0"):
        run(cfg, jobs=1)


def test_summarize_formats(merge_report):
    report, _, _ = merge_report
    text = summarize(report, "text")
    assert "level 0.4" in text
    assert "iterative_bayesian_ridge" in text
    csv_text = summarize(report, "csv")
    header = csv_text.splitlines()[0].split(",")
    assert header[:3] == ["level", "method", "repetitions"]
    assert "auc_mean" in header and "rank1_mean" in header
    with pytest.raises(ConfigError):
        summarize(report, "xml")


def test_dataset_config_requires_exactly_one_source():
    with pytest.raises(ConfigError):
        DatasetConfig.from_dict({})
    with pytest.raises(ConfigError):
        DatasetConfig.from_dict({"synth": uniform_spec(4, 2).to_dict(),
                                 "files": {"format": "wide_csv", "path": "x"}})


def test_dataset_config_file_loading(tmp_path):
    from scorefuse.io import write_table
    from scorefuse.synth import generate

    table = generate(uniform_spec(6, 2, seed=1))
    path = tmp_path / "t.csv"
    write_table(table, "wide_csv", path)
    cfg = DatasetConfig.from_dict({"files": {"format": "wide_csv", "path": str(path)}})
    loaded = cfg.load()
    assert loaded.n_rows == 36


def test_imputation_beats_no_imputation_on_mixed_quality_data():
    # merge scenario on modalities with mismatched class positions: fusing
    # only the available scores misranks across patterns, imputation repairs it
    cfg = ExperimentConfig(
        dataset=DatasetConfig(synth_spec=mixed_quality_spec(n_identities=60, seed=77)),
        scenario=Scenario("merge"),
        missing_levels=(0.5,),
        repetitions=2,
        master_seed=13,
        methods=(_parse_method("no_imputation"), _parse_method("iterative_knn")),
    )
    report = run(cfg, jobs=2)
    knn = report.summary_row(0.5, "iterative_knn")["mean"]["auc"]
    none = report.summary_row(0.5, "no_imputation")["mean"]["auc"]
    assert knn > none
