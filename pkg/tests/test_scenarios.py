import numpy as np
import pytest

from scorefuse.errors import InfeasibleLevel, LevelOutOfRange, ShapeMismatch, UnknownModality
from scorefuse.model import split_by_probe, table_equal
from scorefuse.scenarios import (
    MaskPlan,
    Scenario,
    apply_plan,
    plan_add_modality,
    plan_merge,
    plan_retire,
)
from scorefuse.synth import generate, uniform_spec
from scorefuse.util import mix_seed, round_half_up


@pytest.fixture(scope="module")
def table_4mod():
    return generate(uniform_spec(60, 4, seed=20))


def test_scenario_validation():
    Scenario("merge")
    Scenario("add_modality", "m1")
    with pytest.raises(ValueError):
        Scenario("bogus")
    with pytest.raises(ValueError):
        Scenario("add_modality")
    with pytest.raises(ValueError):
        Scenario("retire")
    with pytest.raises(ValueError):
        Scenario("merge", "m1")


def test_add_modality_exact_count(table_4mod):
    plan = plan_add_modality(table_4mod, "m2", 0.1, seed=1)
    assert plan.cell_count == round_half_up(0.1 * table_4mod.n_rows)
    assert set(plan.cols.tolist()) == {1}
    masked = apply_plan(table_4mod, plan)
    # other columns untouched
    others = [0, 2, 3]
    assert masked.present[:, others].all()


def test_add_modality_bssr1_scale_count():
    # the level-0.1 blank count at the 517-identity scale
    table = generate(uniform_spec(517, 2, seed=21))
    assert table.n_rows == 267_289
    plan = plan_add_modality(table, "m1", 0.1, seed=2)
    assert plan.cell_count == 26_729


def test_add_modality_level_zero_is_identity(table_4mod):
    plan = plan_add_modality(table_4mod, "m1", 0.0, seed=3)
    assert plan.cell_count == 0
    assert table_equal(apply_plan(table_4mod, plan), table_4mod)


def test_add_modality_level_one_keeps_other_column():
    table = generate(uniform_spec(25, 2, seed=22))
    plan = plan_add_modality(table, "m2", 1.0, seed=4)
    masked = apply_plan(table, plan)
    assert not masked.present[:, 1].any()
    assert masked.present[:, 0].all()


def test_add_modality_errors(table_4mod):
    with pytest.raises(UnknownModality):
        plan_add_modality(table_4mod, "nope", 0.1, seed=0)
    with pytest.raises(LevelOutOfRange):
        plan_add_modality(table_4mod, "m1", 1.2, seed=0)
    with pytest.raises(LevelOutOfRange):
        plan_add_modality(table_4mod, "m1", -0.1, seed=0)


def test_merge_exact_count_and_survival(table_4mod):
    level = 0.5
    plan = plan_merge(table_4mod, level, seed=5)
    assert plan.cell_count == round_half_up(level * table_4mod.n_rows * 4)
    masked = apply_plan(table_4mod, plan)
    assert masked.present.sum(axis=1).min() >= 1


def test_merge_feasibility_bound(table_4mod):
    # 4 modalities: anything above 3/4 cannot keep one score per row
    with pytest.raises(InfeasibleLevel):
        plan_merge(table_4mod, 0.8, seed=6)
    with pytest.raises(InfeasibleLevel):
        plan_merge(table_4mod, 0.9, seed=6)


def test_merge_boundary_level_forces_single_scores(table_4mod):
    plan = plan_merge(table_4mod, 0.75, seed=7)
    masked = apply_plan(table_4mod, plan)
    remaining = masked.present.sum(axis=1)
    assert remaining.min() == 1
    assert (remaining == 1).all()  # exactly one survivor per row at the bound
    assert plan.cell_count == round_half_up(0.75 * table_4mod.n_rows * 4)


def test_merge_high_level_leaves_single_score_rows():
    table = generate(uniform_spec(60, 4, seed=23))
    plan = plan_merge(table, 0.7, seed=8)
    masked = apply_plan(table, plan)
    remaining = masked.present.sum(axis=1)
    assert remaining.min() >= 1
    assert (remaining == 1).any()


def test_merge_level_zero(table_4mod):
    plan = plan_merge(table_4mod, 0.0, seed=9)
    assert plan.cell_count == 0
    assert table_equal(apply_plan(table_4mod, plan), table_4mod)


def test_merge_per_modality_fractions():
    table = generate(uniform_spec(100, 4, seed=24))
    plan = plan_merge(table, 0.5, seed=10)
    masked = apply_plan(table, plan)
    fractions = (~masked.present).mean(axis=0)
    assert np.all(np.abs(fractions - 0.5) < 0.02)


def test_retire_masks_test_rows_only(table_4mod):
    split = split_by_probe(table_4mod, 0.8, seed=30)
    level = 0.9
    plan = plan_retire(table_4mod, split, "m3", level, seed=11)
    test_mask = split.test_mask(table_4mod)
    assert plan.cell_count == round_half_up(level * int(test_mask.sum()))
    assert plan.scope == "test_only"
    masked = apply_plan(table_4mod, plan)
    train_mask = split.train_mask(table_4mod)
    assert masked.present[train_mask].all()
    blanked = ~masked.present[:, 2]
    assert (blanked & train_mask).sum() == 0


def test_retire_full_retirement(table_4mod):
    split = split_by_probe(table_4mod, 0.8, seed=31)
    plan = plan_retire(table_4mod, split, "m1", 1.0, seed=12)
    masked = apply_plan(table_4mod, plan)
    test_mask = split.test_mask(table_4mod)
    assert not masked.present[test_mask, 0].any()
    assert masked.present[~test_mask, 0].all()


def test_retire_level_zero_noop(table_4mod):
    split = split_by_probe(table_4mod, 0.8, seed=32)
    plan = plan_retire(table_4mod, split, "m1", 0.0, seed=13)
    assert plan.cell_count == 0
    assert table_equal(apply_plan(table_4mod, plan), table_4mod)


def test_retire_unknown_modality(table_4mod):
    split = split_by_probe(table_4mod, 0.8, seed=33)
    with pytest.raises(UnknownModality):
        plan_retire(table_4mod, split, "zz", 0.5, seed=0)


@pytest.mark.parametrize("make_plan", [
    lambda t, seed: plan_add_modality(t, "m1", 0.3, seed),
    lambda t, seed: plan_merge(t, 0.4, seed),
])
def test_plans_deterministic(table_4mod, make_plan):
    a = make_plan(table_4mod, 42)
    b = make_plan(table_4mod, 42)
    assert np.array_equal(a.rows, b.rows) and np.array_equal(a.cols, b.cols)
    c = make_plan(table_4mod, 43)
    assert not (np.array_equal(a.rows, c.rows) and np.array_equal(a.cols, c.cols))


def test_mixed_seeds_give_disjoint_plans(table_4mod):
    # repetition seeds from the avalanche mix make distinct masks
    plans = [
        plan_merge(table_4mod, 0.3, mix_seed(99, 2, 300, rep)).cells()
        for rep in range(3)
    ]
    assert plans[0] != plans[1] != plans[2]


def test_survival_over_full_grid():
    table = generate(uniform_spec(40, 4, seed=25))
    split = split_by_probe(table, 0.8, seed=34)
    levels = (0.0, 0.1, 0.3, 0.5, 0.7)
    for rep in range(3):
        for level in levels:
            for plan in (
                plan_add_modality(table, "m2", level, mix_seed(7, 1, rep)),
                plan_merge(table, level, mix_seed(7, 2, rep)),
                plan_retire(table, split, "m4", level, mix_seed(7, 3, rep)),
            ):
                masked = apply_plan(table, plan)
                assert masked.present.sum(axis=1).min() >= 1


def test_apply_shape_mismatch(table_4mod):
    other = generate(uniform_spec(10, 4, seed=26))
    plan = plan_merge(table_4mod, 0.2, seed=14)
    with pytest.raises(ShapeMismatch):
        apply_plan(other, plan)


def test_apply_does_not_touch_input(table_4mod):
    plan = plan_merge(table_4mod, 0.3, seed=15)
    before = table_4mod.scores.copy()
    apply_plan(table_4mod, plan)
    assert np.array_equal(table_4mod.scores, before)


def test_plan_csv_audit(tmp_path, table_4mod):
    plan = plan_add_modality(table_4mod, "m2", 0.05, seed=16)
    out = tmp_path / "plan.csv"
    plan.to_csv(out, table_4mod.modalities)
    lines = out.read_text(encoding="utf-8").strip().splitlines()
    assert lines[0] == "row_index,modality"
    assert len(lines) == plan.cell_count + 1
    assert all(line.endswith(",m2") for line in lines[1:])


def test_plan_cells_view(table_4mod):
    plan = plan_add_modality(table_4mod, "m1", 0.02, seed=17)
    cells = plan.cells()
    assert len(cells) == plan.cell_count
    assert all(c == 0 for _, c in cells)
    assert isinstance(plan, MaskPlan)
