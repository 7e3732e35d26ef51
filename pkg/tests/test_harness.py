import json
import math

import numpy as np
import pytest

from ghz_lab.channels import named_channel
from ghz_lab.errors import PreconditionError
from ghz_lab.harness.campaigns import (
    CAMPAIGNS,
    DEFAULT_TOLERANCES,
    sample_rngs,
    single_sided_residual,
    two_sided_residuals,
    verify_evolution_equations,
    verify_lu_invariance,
    verify_never_vanish,
    verify_rank4_roof,
    verify_single_sided,
    verify_three_sided_factorization,
    verify_two_sided,
    verify_two_sided_factorization,
)
from ghz_lab.harness.report import VerificationReport, plain, write_atomic


def test_campaign_names_match_tolerances():
    assert set(CAMPAIGNS) == set(DEFAULT_TOLERANCES)


def test_sample_rngs_are_reproducible():
    a = [rng.random() for rng in sample_rngs(42, 3)]
    b = [rng.random() for rng in sample_rngs(42, 3)]
    assert a == b
    assert len(set(a)) == 3
    with pytest.raises(PreconditionError):
        sample_rngs(42, 0)


def test_single_sided_residual_is_small():
    assert single_sided_residual(named_channel("depolarizing", 0.3)) < 1e-9


def test_two_sided_residuals_by_variant():
    a = named_channel("bitphaseflip", 0.3)
    b = named_channel("bitflip", 0.4)
    residuals = two_sided_residuals(a, b)
    assert set(residuals) == {"squared", "cubed"}
    assert residuals["squared"] < 1e-9


def test_single_sided_campaign():
    report = verify_single_sided(samples=5, seed=1)
    assert report.passed
    assert report.samples == 5
    assert len(report.per_sample) == 5


def test_single_sided_campaign_is_deterministic():
    a = verify_single_sided(samples=3, seed=9).per_sample
    b = verify_single_sided(samples=3, seed=9).per_sample
    assert a == b


def test_two_sided_campaign_reports_both_variants():
    report = verify_two_sided(samples=4, seed=2)
    assert report.passed
    assert report.details["better_variant"] == "squared"
    assert set(report.details["max_residual_by_variant"]) == {"squared", "cubed"}
    with pytest.raises(PreconditionError):
        verify_two_sided(samples=1, eq15_variant="quartic")


def test_factorization_campaigns():
    two = verify_two_sided_factorization(samples=4, seed=3)
    assert two.passed
    three = verify_three_sided_factorization(samples=3, seed=3)
    assert three.passed
    assert three.samples == 6
    assert set(three.details["families"]) == {"all-bitflip", "two-bitphaseflip-one-bitflip"}


def test_evolution_bipartite_law_holds_tau3_law_does_not():
    report = verify_evolution_equations(samples=20, seed=42)
    assert report.details["max_bipartite_residual"] < 1e-6
    assert report.details["bipartite_law_holds"]
    # τ₃ is not LU invariant on mixed states, so the τ₃ law fails away from GHZ
    assert report.details["max_tau3_residual"] > 1e-2
    assert not report.details["tau3_law_holds"]
    assert not report.passed
    assert report.max_residual == pytest.approx(report.details["max_tau3_residual"])


def test_lu_invariance_exact_for_pure_states_only():
    report = verify_lu_invariance(samples=16, seed=42)
    assert set(report.details["max_residual_by_rank"]) == {str(r) for r in range(1, 9)}
    assert report.details["max_pure_residual"] < 1e-8
    assert report.details["max_mixed_residual"] > 1e-4
    assert not report.passed


@pytest.mark.parametrize(
    ("campaign", "kwargs"),
    [
        (verify_single_sided, {"samples": 2}),
        (verify_two_sided, {"samples": 2}),
        (verify_two_sided_factorization, {"samples": 2}),
        (verify_three_sided_factorization, {"samples": 1}),
        (verify_evolution_equations, {"samples": 2}),
        (verify_never_vanish, {"grid_points": 3}),
        (verify_lu_invariance, {"samples": 2}),
        (verify_rank4_roof, {"samples": 1, "restarts": 1}),
    ],
)
def test_every_report_records_seed_and_variant(campaign, kwargs):
    d = campaign(seed=7, eq15_variant="cubed", **kwargs).to_dict()
    assert d["seed"] == 7
    assert d["variant_flags"]["eq15_variant"] == "cubed"
    assert d["samples"] >= 1
    assert "tolerance" in d


def test_never_vanish():
    report = verify_never_vanish(grid_points=5, seed=3)
    assert report.seed == 3
    assert report.passed
    assert report.tolerance == 0.0
    assert len(report.rows) == 10
    minimum = report.details["minima"]["bitflip"]
    assert minimum["min_tau3"] == pytest.approx(math.sqrt(1 / 3))
    assert minimum["at_p"] == pytest.approx(0.5)


def test_rank4_roof_small():
    report = verify_rank4_roof(samples=2, restarts=1, seed=5)
    assert len(report.rows) == 2
    assert [row["kind"] for row in report.rows] == ["rank-1", "rank-2"]
    # rank-1 states satisfy sqrt(2) * C3 = tau3
    assert report.rows[0]["deviation"] < 1e-6
    assert report.details["bridge_holds"]


def test_rank4_roof_workers_match_serial():
    serial = verify_rank4_roof(samples=2, restarts=1, seed=11)
    pooled = verify_rank4_roof(samples=2, restarts=1, seed=11, workers=2)
    assert [row["kind"] for row in pooled.rows] == [row["kind"] for row in serial.rows]
    assert [row["roof"] for row in pooled.rows] == pytest.approx([row["roof"] for row in serial.rows], rel=1e-12)
    with pytest.raises(PreconditionError):
        verify_rank4_roof(samples=1, restarts=1, workers=0)


def test_report_json_layout(tmp_path):
    report = VerificationReport(
        "analytic-1sided", 42, 2, 1e-8, [1e-12, 3e-12], details={"x": np.float64(1.5)}
    )
    d = json.loads(report.to_json())
    assert list(d)[:6] == ["campaign", "seed", "samples", "tolerance", "variant_flags", "residuals"]
    assert d["residuals"]["max"] == pytest.approx(3e-12)
    assert d["pass"] is True
    assert d["details"] == {"x": 1.5}
    assert "timestamp" not in d
    assert "timestamp" in json.loads(report.stamp().to_json())

    path = report.write(tmp_path / "sub" / "report.json")
    assert json.loads(path.read_text())["campaign"] == "analytic-1sided"


def test_failed_report():
    report = VerificationReport("evolution", 1, 1, 1e-6, [1e-3])
    assert not report.passed
    assert report.to_dict()["pass"] is False


def test_plain():
    assert plain({"a": (np.float64(1.0), np.nan), 1: np.arange(2)}) == {"a": [1.0, None], "1": [0, 1]}


def test_write_atomic_leaves_no_temp_files(tmp_path):
    write_atomic(tmp_path / "out.txt", "hello")
    assert [p.name for p in tmp_path.iterdir()] == ["out.txt"]
