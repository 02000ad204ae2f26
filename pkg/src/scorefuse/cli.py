"""Command-line front end.

Every subcommand is a thin adapter over the library: stdout carries data or
report text only, diagnostics go to stderr. Exit codes: 0 success, 1 usage
error, 2 data/validation error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import io as table_io
from . import normalize, runner, synth
from .errors import ScoreFuseError
from .imputation import (
    FittedImputer,
    ITERATIVE,
    ImputerSpec,
    LISTWISE,
    MEAN,
    MEDIAN,
    apply_fitted_simple,
    apply_iterative,
    fit_iterative,
    impute_mean,
    impute_median,
    listwise_delete,
)
from .metrics import cmc, fuse_simple_sum, read_fused_csv, roc, write_fused_csv
from .model import split_by_probe
from .scenarios import (
    ADD_MODALITY,
    MERGE,
    RETIRE,
    SCENARIOS,
    apply_plan,
    plan_add_modality,
    plan_merge,
    plan_retire,
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems via exit code 1."""

    def error(self, message):
        raise UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="scorefuse", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("convert", help="convert a score table between formats")
    p.add_argument("--in", dest="inputs", action="append", required=True,
                   help="input path (repeat for one matrix file per modality)")
    p.add_argument("--in-format", choices=table_io.FORMATS, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--out-format", choices=table_io.FORMATS, required=True)
    p.add_argument("--validate-bssr1", action="store_true",
                   help="require the NIST BSSR1 Set 1 score inventory")
    p.add_argument("--modalities", help="comma-separated modality names")
    p.add_argument("--gallery-size", type=int)

    p = sub.add_parser("synth", help="generate a synthetic score table")
    p.add_argument("--spec", required=True, help="JSON file with the generator spec")
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=(table_io.LONG_CSV, table_io.WIDE_CSV),
                   default=table_io.LONG_CSV)

    p = sub.add_parser("mask", help="blank scores per an evolution scenario")
    p.add_argument("--scenario", choices=SCENARIOS, required=True)
    p.add_argument("--level", type=float, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--target-modality")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--plan-out", help="also write the blanked cells as CSV")
    p.add_argument("--format", choices=(table_io.LONG_CSV, table_io.WIDE_CSV),
                   default=table_io.LONG_CSV)
    p.add_argument("--split-fraction", type=float, default=0.8,
                   help="retire only: train fraction for the probe split")
    p.add_argument("--split-seed", type=int, default=0,
                   help="retire only: seed for the probe split")

    p = sub.add_parser("impute", help="fit an imputer on one table, fill another")
    p.add_argument("--method", choices=(MEAN, MEDIAN, LISTWISE, ITERATIVE))
    p.add_argument("--regressor", choices=("bayesian_ridge", "cart", "knn"))
    p.add_argument("--train", help="table to fit on")
    p.add_argument("--apply", dest="apply_path", required=True, help="table to fill")
    p.add_argument("--out", required=True)
    p.add_argument("--model-out", help="save the fitted imputer as JSON")
    p.add_argument("--model-in", help="load a fitted imputer instead of fitting")
    p.add_argument("--format", choices=(table_io.LONG_CSV, table_io.WIDE_CSV),
                   default=table_io.LONG_CSV)

    p = sub.add_parser("fuse", help="simple-sum fusion of a score table")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--skip-missing", action="store_true",
                   help="fuse the mean of available scores (no-imputation baseline)")
    p.add_argument("--format", choices=(table_io.LONG_CSV, table_io.WIDE_CSV),
                   default=table_io.LONG_CSV)

    p = sub.add_parser("eval", help="ROC and CMC from fused scores")
    p.add_argument("--in", dest="input", required=True, help="fused-score CSV")
    p.add_argument("--roc-out", required=True)
    p.add_argument("--cmc-out", required=True)
    p.add_argument("--max-rank", type=int, default=10)

    p = sub.add_parser("run", help="run a full experiment grid")
    p.add_argument("--config", required=True, help="experiment config JSON")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--jobs", type=int, default=None,
                   help="grid cells to evaluate concurrently (default: cores)")

    p = sub.add_parser("summarize", help="render tables from a report")
    p.add_argument("--report", required=True, help="report.json from a run")
    p.add_argument("--format", choices=("csv", "text"), default="text")

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _dispatch(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except ScoreFuseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entry() -> None:
    raise SystemExit(main())


def _dispatch(args) -> int:
    handler = {
        "convert": _cmd_convert,
        "synth": _cmd_synth,
        "mask": _cmd_mask,
        "impute": _cmd_impute,
        "fuse": _cmd_fuse,
        "eval": _cmd_eval,
        "run": _cmd_run,
        "summarize": _cmd_summarize,
    }[args.command]
    return handler(args)


def _read_table(path: str, fmt: str, args=None):
    if fmt == table_io.BSSR1_MATRIX_SET:
        raise UsageError("matrix-set input requires the convert subcommand")
    return table_io.read_table(fmt, path)


def _cmd_convert(args) -> int:
    mods = args.modalities.split(",") if args.modalities else None
    if args.in_format == table_io.BSSR1_MATRIX_SET:
        paths = list(args.inputs)
        if len(paths) == 1 and Path(paths[0]).is_dir():
            paths = sorted(Path(paths[0]).glob("*.txt"))
            if not paths:
                raise ScoreFuseError(f"no .txt matrix files in {args.inputs[0]}")
        expected = table_io.BSSR1_SET1_INVENTORY if args.validate_bssr1 else None
        table = table_io.read_bssr1_matrix_set(
            paths, modality_names=mods, gallery_size=args.gallery_size,
            expected_inventory=expected)
    else:
        if len(args.inputs) != 1:
            raise UsageError(f"{args.in_format} takes exactly one --in path")
        if args.in_format == table_io.LONG_CSV:
            table = table_io.read_long_csv(args.inputs[0], modalities=mods)
        else:
            table = table_io.read_wide_csv(args.inputs[0])
        if args.validate_bssr1:
            table_io.validate_inventory(table, table_io.BSSR1_SET1_INVENTORY)
    table_io.write_table(table, args.out_format, args.out)
    print(f"wrote {table.n_rows} rows x {table.modalities.count} modalities to {args.out}",
          file=sys.stderr)
    return 0


def _cmd_synth(args) -> int:
    spec_data = json.loads(Path(args.spec).read_text(encoding="utf-8"))
    spec = synth.SynthSpec.from_dict(spec_data)
    table = synth.generate(spec)
    table_io.write_table(table, args.format, args.out)
    print(f"generated {table.n_rows} rows ({table.genuine_count} genuine) to {args.out}",
          file=sys.stderr)
    return 0


def _cmd_mask(args) -> int:
    table = _read_table(args.input, args.format)
    if args.scenario == ADD_MODALITY:
        if not args.target_modality:
            raise UsageError("add_modality requires --target-modality")
        plan = plan_add_modality(table, args.target_modality, args.level, args.seed)
    elif args.scenario == MERGE:
        plan = plan_merge(table, args.level, args.seed)
    else:
        if not args.target_modality:
            raise UsageError("retire requires --target-modality")
        split = split_by_probe(table, args.split_fraction, args.split_seed)
        plan = plan_retire(table, split, args.target_modality, args.level, args.seed)
    masked = apply_plan(table, plan)
    table_io.write_table(masked, args.format, args.out)
    if args.plan_out:
        plan.to_csv(args.plan_out, table.modalities)
    print(f"blanked {plan.cell_count} cells to {args.out}", file=sys.stderr)
    return 0


def _cmd_impute(args) -> int:
    table = _read_table(args.apply_path, args.format)
    if args.model_in:
        fitted = FittedImputer.load(args.model_in)
        if fitted.spec.method == ITERATIVE:
            filled = apply_iterative(table, fitted)
        else:
            filled = apply_fitted_simple(table, fitted)
    else:
        if not args.method:
            raise UsageError("either --model-in or --method is required")
        if args.method == LISTWISE:
            filled = listwise_delete(table)
            fitted = None
        else:
            train_table = _read_table(args.train, args.format) if args.train else table
            if args.method == MEAN:
                _, fitted = impute_mean(train_table)
                filled = apply_fitted_simple(table, fitted)
            elif args.method == MEDIAN:
                _, fitted = impute_median(train_table)
                filled = apply_fitted_simple(table, fitted)
            else:
                if not args.regressor:
                    raise UsageError("iterative imputation requires --regressor")
                spec = ImputerSpec(method=ITERATIVE, regressor=args.regressor)
                fitted = fit_iterative(train_table, None, spec)
                filled = apply_iterative(table, fitted)
        if args.model_out:
            if fitted is None:
                raise UsageError("listwise deletion has no model to save")
            fitted.save(args.model_out)
    table_io.write_table(filled, args.format, args.out)
    print(f"wrote {filled.n_rows} rows to {args.out}", file=sys.stderr)
    return 0


def _cmd_fuse(args) -> int:
    table = _read_table(args.input, args.format)
    fused = fuse_simple_sum(table, skip_missing=args.skip_missing)
    write_fused_csv(fused, args.out)
    print(f"fused {fused.n_rows} rows to {args.out}", file=sys.stderr)
    return 0


def _cmd_eval(args) -> int:
    fused = read_fused_csv(args.input)
    curve = roc(fused)
    curve.to_csv(args.roc_out)
    cmc_curve = cmc(fused, args.max_rank)
    cmc_curve.to_csv(args.cmc_out)
    print(f"auc={curve.auc:.6f} eer={curve.eer:.6f} rank1={cmc_curve.at_rank(1):.6f}")
    return 0


def _cmd_run(args) -> int:
    config = runner.ExperimentConfig.from_json_file(args.config)
    report = runner.run(config, out_dir=args.out_dir, jobs=args.jobs)
    print(f"wrote report with {len(report.cells)} cells to {args.out_dir}", file=sys.stderr)
    return 0


def _cmd_summarize(args) -> int:
    report = runner.EvalReport.load(args.report)
    sys.stdout.write(runner.summarize(report, args.format))
    return 0


if __name__ == "__main__":
    entry()
