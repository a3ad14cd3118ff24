import json
import math

import numpy as np
import pytest
from scipy.stats import qmc

from byzfit.aggregate import (Adversarial, BoxModel, FitterConfig, Generator, LocalFit, MergePlan, Partition,
                              UniformBand, aggregate, fit_local, generate, halton, merge_hierarchical,
                              parse_corruption, parse_noise, radical_inverse)
from byzfit.calibration import C_STAR
from byzfit.chebyshev import ChebModel, grid_points
from byzfit.dataset import DataSet
from byzfit.errors import FitFailure
from byzfit.expr import parse_poly
from byzfit.fields import QQ, RR
from byzfit.lpfit import FilterConfig, fit_robust
from byzfit.poly import evaluate, evaluate_many
from byzfit.report import FitReport

DELTA = 0.05
HALF_SUM = parse_poly("1/2*x + 1/2*y", 2, RR)
BOX = [(-1.0, 1.0), (-1.0, 1.0)]
LP2 = FitterConfig("lp", {"d": 2, "delta": DELTA, "filter": False})


# ---------------------------------------------------------------- generate

def test_generate_exact_grid():
    p = parse_poly("x + y", 2, QQ)
    S = generate(Generator(p, field=QQ, seed=3), 7)
    assert len({x[0] for x in S.X}) == 7
    for x, z in S.points():
        assert z == evaluate(p, tuple(x))
    assert S.labels == ["clean"] * 7


def test_generate_adversarial_labels():
    n = 333
    S = generate(Generator(HALF_SUM, UniformBand(DELTA), 0.2, Adversarial(3 * DELTA), seed=9), n)
    bad = [i for i, lab in enumerate(S.labels) if lab == "corrupt"]
    assert len(bad) == math.ceil(0.2 * n)
    f = evaluate_many(HALF_SUM, np.asarray(S.X, dtype=float))
    resid = np.abs(np.asarray(S.z, dtype=float) - f)
    assert np.all(resid[bad] > 2 * DELTA)
    good = [i for i in range(n) if i not in set(bad)]
    assert np.all(resid[good] <= DELTA)
    assert np.all(np.abs(S.z) <= 1)


def test_generate_deterministic_bytes():
    gen = Generator(HALF_SUM, UniformBand(DELTA), 0.1, seed=42, layout="clustered")
    a, b = generate(gen, 50), generate(gen, 50)
    assert a.to_csv_text() == b.to_csv_text()
    assert json.dumps(a.manifest()) == json.dumps(b.manifest())
    assert generate(Generator(HALF_SUM, seed=43), 50).to_csv_text() != generate(Generator(HALF_SUM, seed=42), 50).to_csv_text()


def test_generator_validation():
    with pytest.raises(ValueError):
        Generator(HALF_SUM, beta=1.0)
    with pytest.raises(ValueError):
        Generator(HALF_SUM, layout="grid")
    with pytest.raises(ValueError):
        Generator(parse_poly("x", 1, QQ), field=QQ, layout="uniform")


def test_rule_parsers():
    assert parse_noise("uniform:0.05") == UniformBand(0.05)
    assert parse_noise("none") is None
    assert parse_noise("alphabet:-1,0,1").offsets == (-1, 0, 1)
    assert parse_corruption("adversarial:0.15") == Adversarial(0.15)
    with pytest.raises(ValueError):
        parse_noise("gaussian:1")


# ---------------------------------------------------------------- partition

def test_partition_regular_and_assign():
    part = Partition.regular(4, BOX)
    assert len(part.cells) == 4 and part.box == BOX
    where = part.assign([[-0.5, -0.5], [0.0, 0.0], [1.0, 1.0], [-1.0, 1.0]])
    assert where[1] == where[2]          # shared face and outer corner both go to the upper cell
    assert len(set(where)) == 3
    with pytest.raises(ValueError):
        part.assign([[1.5, 0.0]])
    assert len(Partition.regular(6, BOX).cells) == 6


def test_partition_json_roundtrip():
    part = Partition.regular(4, BOX)
    assert Partition.from_json(json.loads(json.dumps(part.to_json()))) == part


# ---------------------------------------------------------------- local fits

def test_fit_local_four_cells():
    S = generate(Generator(HALF_SUM, UniformBand(DELTA), seed=1), 800)
    fits = fit_local(S, Partition.regular(4, BOX), LP2, truth=HALF_SUM)
    assert all(lf.ok for lf in fits)
    for lf in fits:
        assert lf.report.sup_vs_truth <= C_STAR[(4, 2)] * DELTA
        P = grid_points(21, 2, lf.box)
        assert np.max(np.abs(lf.model(P) - evaluate_many(HALF_SUM, P))) <= C_STAR[(4, 2)] * DELTA


def test_fit_local_parallel_matches_serial():
    S = generate(Generator(HALF_SUM, UniformBand(DELTA), seed=2), 400)
    part = Partition.regular(4, BOX)
    a = fit_local(S, part, LP2, jobs=1)
    b = fit_local(S, part, LP2, jobs=4)
    for x, y in zip(a, b):
        assert np.array_equal(x.model.model.coeffs, y.model.model.coeffs)


def test_one_corrupted_cell_fails_alone():
    h = DELTA / 8
    S = generate(Generator(HALF_SUM, UniformBand(DELTA), seed=3, layout="clustered", cluster_spread=h / 2), 2000)
    part = Partition.regular(4, BOX)
    where = part.assign(np.asarray(S.X, dtype=float))
    rng = np.random.default_rng(0)
    in0 = np.flatnonzero(where == 0)
    S.z[in0] = rng.uniform(-1, 1, len(in0))
    fits = fit_local(S, part, FitterConfig("lp", {"d": 2, "delta": DELTA}))
    assert [lf.ok for lf in fits] == [False, True, True, True]
    assert fits[0].report.status == "error" and fits[0].report.extra["kind"] == "InsufficientCleanData"
    plan = MergePlan.balanced(4, 100, FitterConfig("lp", {"d": 2, "delta": DELTA}))
    root, drift = merge_hierarchical(fits, plan)
    assert {"level": 2, "skipped": 0} in drift
    assert root is not None


def test_every_cell_failing_raises():
    rng = np.random.default_rng(0)
    S = DataSet(rng.uniform(-1, 1, (40, 2)), rng.uniform(-1, 1, 40), RR)
    with pytest.raises(FitFailure):
        fit_local(S, Partition.regular(4, BOX), FitterConfig("lp", {"d": 2, "delta": DELTA}))


def test_single_cell_equals_direct_fit():
    S = generate(Generator(HALF_SUM, UniformBand(DELTA), seed=4), 300)
    [lf] = fit_local(S, Partition.grid(BOX, (1, 1)), LP2)
    direct = fit_robust(S, FilterConfig(2, DELTA, 1.0), filter=False)
    np.testing.assert_allclose(lf.model.model.coeffs, direct.model.coeffs, atol=1e-12)


# ---------------------------------------------------------------- merge

def _restriction(box):
    """0.5 x + 0.25 y expressed in the local coordinates of ``box`` (x-range only varies)."""
    (lo, hi), _ = box
    a, b = (hi - lo) / 2, (hi + lo) / 2      # x = a u + b
    return BoxModel(ChebModel([[0.5 * b, 0.25], [0.5 * a, 0.0]]), box)


def _truth(P):
    return 0.5 * P[:, 0] + 0.25 * P[:, 1]


def test_merge_exact_restrictions():
    boxes = [[(-1.0, 0.0), (-1.0, 1.0)], [(0.0, 1.0), (-1.0, 1.0)]]
    fits = [LocalFit(i, b, _restriction(b), FitReport(algorithm="lp")) for i, b in enumerate(boxes)]
    root, drift = merge_hierarchical(fits, MergePlan([0, 1], 60, LP2))
    P = grid_points(41, 2)
    assert np.max(np.abs(root(P) - _truth(P))) <= 1e-6
    assert len(drift) == 2 and all(d["sup"] <= 1e-6 for d in drift)


def test_merge_with_itself_is_idempotent():
    box = [(-1.0, 1.0), (-1.0, 1.0)]
    lf = _restriction(box)
    fits = [LocalFit(0, box, lf, FitReport(algorithm="lp")), LocalFit(1, box, lf, FitReport(algorithm="lp"))]
    root, _ = merge_hierarchical(fits, MergePlan([0, 1], 40, LP2))
    c = np.zeros((3, 3))
    c[:2, :2] = lf.model.coeffs
    assert np.max(np.abs(root.model.coeffs - c)) <= 1e-9


def test_merge_resample_below_minimum():
    boxes = [[(-1.0, 0.0), (-1.0, 1.0)], [(0.0, 1.0), (-1.0, 1.0)]]
    fits = [LocalFit(i, b, _restriction(b), FitReport(algorithm="lp")) for i, b in enumerate(boxes)]
    with pytest.raises(ValueError, match="below the fitter minimum"):
        merge_hierarchical(fits, MergePlan([0, 1], 2, LP2))


def test_merge_exact_wb():
    p = parse_poly("x + y", 2, QQ)
    S = generate(Generator(p, field=QQ, seed=5, box=[(0, 40), (0, 40)]), 40)
    part = Partition.grid([(0, 40), (0, 40)], (2, 1))
    cfg = FitterConfig("wb", {"d": 1, "rho_clean": 1, "delta": 0})
    fits = fit_local(S, part, cfg)
    root, drift = merge_hierarchical(fits, MergePlan.balanced(2, 5, cfg), QQ)
    assert root.model == p and drift == []


def test_aggregate_end_to_end_deterministic():
    S = generate(Generator(HALF_SUM, UniformBand(DELTA), seed=6), 800)
    part = Partition.regular(4, BOX)
    plan = MergePlan.balanced(4, 150, LP2)
    a, root = aggregate(S, part, plan, truth=HALF_SUM)
    b, _ = aggregate(S, part, plan, jobs=3, truth=HALF_SUM)
    a.pop("elapsed_ms"), b.pop("elapsed_ms")
    assert a == b
    assert a["sup_vs_truth"] <= C_STAR[(4, 2)] * DELTA
    assert len(a["drift"]) == 6 and {d["level"] for d in a["drift"]} == {0, 1}
    assert json.loads(json.dumps(a)) == a


def test_plan_validation_and_json():
    plan = MergePlan.balanced(5, 10, LP2)
    assert sorted(plan.leaves) == [0, 1, 2, 3, 4]
    assert MergePlan.from_json(json.loads(json.dumps(plan.to_json()))).leaves == plan.leaves
    with pytest.raises(ValueError):
        MergePlan([0, 1, 2], 10, LP2)


# ---------------------------------------------------------------- halton

def test_radical_inverse_values():
    assert [radical_inverse(i, 2) for i in range(1, 5)] == [0.5, 0.25, 0.75, 0.125]
    assert str(radical_inverse(5, 3)) == "7/9"


def test_halton_matches_reference():
    ours = halton(64, 3)
    ref = qmc.Halton(d=3, scramble=False).random(65)[1:]
    np.testing.assert_allclose(ours, ref, atol=1e-15)
    assert halton(3, 2, exact=True)[2] == [radical_inverse(3, 2), radical_inverse(3, 3)]
