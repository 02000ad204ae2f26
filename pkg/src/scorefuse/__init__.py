"""scorefuse: missing-score imputation, simple-sum fusion and ROC/CMC
evaluation for multibiometric score tables."""

from .model import (
    ComparisonRow,
    DataSplit,
    ModalitySet,
    ScoreTable,
    build_table,
    split_by_probe,
    table_equal,
)
from .scenarios import (
    MaskPlan,
    Scenario,
    apply_plan,
    plan_add_modality,
    plan_merge,
    plan_retire,
)
from .imputation import (
    FittedImputer,
    ImputerSpec,
    apply_iterative,
    fit_iterative,
    impute_mean,
    impute_median,
    listwise_delete,
)
from .metrics import CmcCurve, FusedScores, RocCurve, cmc, fuse_simple_sum, roc
from .runner import EvalReport, ExperimentConfig, run, summarize
from .synth import SynthSpec, generate

__version__ = "0.1.0"

__all__ = [
    "CmcCurve",
    "ComparisonRow",
    "DataSplit",
    "EvalReport",
    "ExperimentConfig",
    "FittedImputer",
    "FusedScores",
    "ImputerSpec",
    "MaskPlan",
    "ModalitySet",
    "RocCurve",
    "Scenario",
    "ScoreTable",
    "SynthSpec",
    "apply_iterative",
    "apply_plan",
    "build_table",
    "cmc",
    "fit_iterative",
    "fuse_simple_sum",
    "generate",
    "impute_mean",
    "impute_median",
    "listwise_delete",
    "plan_add_modality",
    "plan_merge",
    "plan_retire",
    "roc",
    "run",
    "split_by_probe",
    "summarize",
    "table_equal",
]
