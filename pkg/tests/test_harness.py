import csv
import json

import numpy as np
import pytest

from conftest import diagonal_matrix
from sublinfrechet import harness
from sublinfrechet.errors import BadParam, RecipeVerificationFailed
from sublinfrechet.freespace import MatrixOracle
from sublinfrechet.harness import Recipe, TrialConfig, TrialParams
from sublinfrechet.testers import Tester1Params


def _diagonal_recipe(n=32):
    return Recipe("explicit", matrix=diagonal_matrix(n), expect="yes")


def test_recipe_validation():
    with pytest.raises(BadParam):
        Recipe("spiral")
    with pytest.raises(BadParam):
        Recipe("explicit")
    with pytest.raises(BadParam):
        Recipe("far_block", expect="maybe")


def test_recipe_predicates():
    assert Recipe("yes_perturb").predicate == "min_cost_coupling == 0"
    assert Recipe("far_block").predicate == "min_cost_coupling > eps * n"
    assert Recipe("hausdorff_far").predicate == "barriers >= ceil(eps * (n + m))"
    assert Recipe("far_block").kind == "far"


def test_trial_config_validation():
    with pytest.raises(BadParam):
        TrialConfig("frechet9", _diagonal_recipe())
    with pytest.raises(BadParam):
        TrialConfig("hausdorff", _diagonal_recipe(), trials=0)


def test_uncertified_explicit_matrix_is_refused():
    M = diagonal_matrix(8)
    M[0, 0] = 1
    cfg = TrialConfig("frechet1", Recipe("explicit", matrix=M, expect="yes"), trials=2, base_seed=1)
    with pytest.raises(RecipeVerificationFailed):
        harness.run_batch(cfg)


def test_generated_far_instance_is_certified():
    recipe = Recipe("far_block", n=64, eps=0.1)
    instance = harness.build_instance(recipe, np.random.SeedSequence(3))
    assert instance.kind == "far"
    assert instance.has_curves
    assert harness.certify(recipe, instance.matrix)
    assert 1 <= instance.attempts <= harness.MAX_ATTEMPTS


def test_yes_instances_are_always_accepted():
    cfg = TrialConfig("frechet1", Recipe("yes_perturb", n=64), TrialParams(eps=0.5), trials=20, base_seed=1)
    report = harness.run_batch(cfg)
    assert report.trials == 20
    assert report.yes_rate == 1.0
    assert report.t >= 1
    assert all(r.witness is None for r in report.records)


def test_batches_are_reproducible():
    cfg = TrialConfig("frechet1", Recipe("far_block", n=64, eps=0.1), TrialParams(eps=0.5), trials=15, base_seed=5)
    first = harness.run_batch(cfg).to_jsonl()
    assert harness.run_batch(cfg).to_jsonl() == first


def test_thread_pool_gives_the_same_records():
    cfg = TrialConfig("frechet1", Recipe("far_block", n=64, eps=0.1), TrialParams(eps=0.5), trials=24, base_seed=9)
    serial = harness.run_batch(cfg)
    threaded = harness.run_batch(TrialConfig(cfg.algorithm, cfg.recipe, cfg.params, 24, 9, workers=4))
    assert threaded.to_jsonl() == serial.to_jsonl()
    assert [r.seed for r in threaded.records] == list(range(9, 33))


def test_seed_from_environment_wins(monkeypatch):
    monkeypatch.setenv("SEED", "99")
    cfg = TrialConfig("hausdorff", _diagonal_recipe(), TrialParams(eps=0.5), trials=3, base_seed=1)
    assert [r.seed for r in harness.run_batch(cfg).records] == [99, 100, 101]


def test_hausdorff_batch_has_exact_query_counts():
    cfg = TrialConfig("hausdorff", _diagonal_recipe(), TrialParams(eps=0.3), trials=10, base_seed=2)
    report = harness.run_batch(cfg)
    assert report.queries == [14] * 10
    assert report.yes_rate == 1.0
    assert report.aggregate()["query_quartiles"] == [14.0, 14.0, 14.0]


def test_hausdorff_rejects_barrier_instances():
    cfg = TrialConfig("hausdorff", Recipe("hausdorff_far", n=64, eps=0.2), TrialParams(eps=0.2), trials=200, base_seed=4)
    report = harness.run_batch(cfg)
    assert report.wilson_lb >= 0.70
    assert report.queries == [20] * 200


def test_curve_algorithms_need_curves(rng):
    instance = harness.Instance(diagonal_matrix(8), 1.0, "yes")
    with pytest.raises(BadParam):
        harness.run_algorithm("reduced", instance, MatrixOracle(instance.matrix), TrialParams(), 1, rng)


def test_explicit_t_skips_measurement():
    instance = harness.Instance(diagonal_matrix(8), 1.0, "yes")
    assert harness.resolve_t("frechet1", instance, TrialParams(t=3)) == 3
    assert harness.resolve_t("frechet1", instance, TrialParams()) == 1
    assert harness.resolve_t("frechet2", instance, TrialParams()) is None


def test_fitted_ratio():
    assert harness.fitted_ratio("frechet1", 80.0, 100, 2, 0.5) == 10.0
    assert harness.fitted_ratio("hausdorff", 80.0, 100, 2, 0.5) is None
    assert harness.fitted_ratio("frechet1", 80.0, 100, None, 0.5) is None


def test_sweep_values_must_be_sorted():
    cfg = TrialConfig("hausdorff", _diagonal_recipe(), trials=2)
    with pytest.raises(BadParam):
        harness.sweep_queries(cfg, "eps", [0.5, 0.25])
    with pytest.raises(BadParam):
        harness.sweep_queries(cfg, "delta", [1.0])


def test_sweep_csv(tmp_path):
    cfg = TrialConfig("hausdorff", _diagonal_recipe(), trials=5, base_seed=3)
    rows = harness.sweep_queries(cfg, "eps", [0.25, 0.5])
    path = harness.write_sweep_csv(rows, tmp_path / "sweep.csv")
    with path.open(newline="", encoding="utf-8") as fh:
        read = list(csv.DictReader(fh))
    assert list(read[0]) == list(harness.SWEEP_COLUMNS)
    assert [float(r["median_q"]) for r in read] == [16.0, 8.0]
    assert [r["fitted_ratio"] for r in read] == ["", ""]


def test_report_jsonl(tmp_path):
    cfg = TrialConfig("approx", _diagonal_recipe(), TrialParams(eps=0.5, t=1), trials=4, base_seed=8)
    report = harness.run_batch(cfg)
    lines = harness.write_report_jsonl(report, tmp_path / "r.jsonl").read_text(encoding="utf-8").splitlines()
    assert len(lines) == 5
    first = json.loads(lines[0])
    assert set(first) == {"seed", "answer", "queries_used", "witness"}
    assert first["queries_used"] == 64
    footer = json.loads(lines[-1])["aggregate"]
    assert footer["trials"] == 4 and footer["yes_rate"] == 1.0
    assert "wall_time" in json.loads(report.to_jsonl(include_timing=True).splitlines()[0])


def test_oblivious_tester_accepts_yes_instances():
    params = TrialParams(eps=0.6, zeta=0.5, k_factor=1.0)
    cfg = TrialConfig("frechet2", Recipe("yes_perturb", n=64), params, trials=5, base_seed=6)
    report = harness.run_batch(cfg)
    assert report.yes_rate == 1.0
    assert min(report.queries) > 0


def test_oblivious_records_carry_the_estimated_locality():
    params = TrialParams(eps=0.6, zeta=0.5, k_factor=1.0)
    report = harness.run_batch(TrialConfig("frechet2", Recipe("yes_perturb", n=64), params, trials=4, base_seed=6))
    estimates = [r.estimated_t for r in report.records]
    assert all(t is not None and t >= 4 and (t & (t - 1)) == 0 for t in estimates)
    assert report.median_estimated_t == float(np.median(estimates))
    assert report.aggregate()["median_estimated_t"] == report.median_estimated_t
    assert all(json.loads(line).get("estimated_t") for line in report.to_jsonl().splitlines()[:-1])


def test_oblivious_sweep_fits_on_the_estimated_locality():
    params = TrialParams(eps=0.6, zeta=0.5, k_factor=1.0)
    cfg = TrialConfig("frechet2", Recipe("yes_perturb", n=64), params, trials=3, base_seed=6)
    rows = harness.sweep_queries(cfg, "n", [64, 128])
    assert [r.axis_value for r in rows] == [64, 128]
    assert all(r.fitted_ratio is not None and r.fitted_ratio > 0 for r in rows)


def test_known_locality_records_stay_plain():
    cfg = TrialConfig("frechet1", Recipe("yes_perturb", n=64), TrialParams(eps=0.5), trials=3, base_seed=1)
    report = harness.run_batch(cfg)
    assert all(r.estimated_t is None for r in report.records)
    assert report.median_estimated_t is None


@pytest.mark.slow
def test_known_locality_soundness_on_far_instances():
    cfg = TrialConfig("frechet1", Recipe("far_block", n=4096, eps=0.2), TrialParams(eps=0.2), trials=400, base_seed=11)
    report = harness.run_batch(cfg)
    # low-turn curves keep the locality small enough for interval sampling
    assert Tester1Params(t=report.t, eps=0.2).K(4096) >= 1
    assert report.wilson_lb >= 0.70


@pytest.mark.slow
def test_oblivious_soundness_on_far_instances():
    params = TrialParams(eps=0.3, zeta=2.0, k_factor=1.0)
    cfg = TrialConfig("frechet2", Recipe("far_block", n=4096, eps=0.3), params, trials=400, base_seed=11)
    report = harness.run_batch(cfg)
    assert Tester1Params(t=int(report.median_estimated_t), eps=0.1).K(4096) >= 1
    assert report.wilson_lb >= 0.70


@pytest.mark.slow
def test_known_locality_queries_do_not_grow_with_n():
    # K stays above 4c here, so sampled levels are sparse and the count is flat in n
    cfg = TrialConfig("frechet1", Recipe("yes_perturb", n=1024, radius=0.0), TrialParams(eps=1.0, t=1), trials=3, base_seed=2)
    rows = harness.sweep_queries(cfg, "n", [1024, 2048, 4096])
    medians = [r.median_q for r in rows]
    assert max(medians) / min(medians) < 1.1
    assert all(r.no_rate == 0.0 for r in rows)


@pytest.mark.slow
def test_known_locality_queries_scale_with_t():
    cfg = TrialConfig("frechet1", Recipe("yes_perturb", n=4096, radius=0.0), TrialParams(eps=1.0), trials=3, base_seed=2)
    rows = harness.sweep_queries(cfg, "t", [1, 2, 4])
    ratios = [r.fitted_ratio for r in rows]
    assert max(ratios) / min(ratios) < 2.0
