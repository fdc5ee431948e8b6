"""Acceptance gate: the full battery, one pass/fail line per criterion.

The battery runs once per session (plus a second full run feeding the
determinism comparison); each test below asserts one criterion's record
at its stated tolerance and prints its own pass/fail line.
"""

import pytest

from momentlab.acceptance import compare_artifact_trees, run_battery


@pytest.fixture(scope="session")
def battery(tmp_path_factory):
    root = tmp_path_factory.mktemp("acceptance")
    first, second = root / "run1", root / "run2"
    records = {rec["criterion"]: rec for rec in run_battery(first)}
    run_battery(second)
    comparison = compare_artifact_trees(first, second)
    records[11] = {
        "criterion": 11,
        "name": "determinism",
        "passed": comparison["match"],
        "details": comparison,
    }
    records["artifact_dir"] = first
    return records


def _check(records, number):
    record = records[number]
    verdict = "PASS" if record["passed"] else "FAIL"
    print(f"criterion {number:02d} {record['name']}: {verdict}")
    assert record["passed"], record["details"]
    return record


def test_criterion_01_moment_identities(battery):
    record = _check(battery, 1)
    assert record["details"]["even_exponents_checked"] == 21


def test_criterion_02_power_expansion_oracle(battery):
    record = _check(battery, 2)
    assert record["details"]["max_substitution_error"] <= 1e-10
    assert record["details"]["max_power_checked_exact"] == 64


def test_criterion_03_window_sum_bounds(battery):
    record = _check(battery, 3)
    details = record["details"]
    assert details["systems"] == 50
    assert details["dual_strategy_instances"] >= 15
    assert details["max_dual_difference"] <= 1e-12
    assert details["tuple_lengths"] == [2, 4, 6]


def test_criterion_04_model_equivalence(battery):
    record = _check(battery, 4)
    details = record["details"]
    assert details["max_main_term_error"] <= 1e-9
    assert details["mc_forms"] == 10**6
    assert details["mc_configs_within_3_sigma"] >= 99


def test_criterion_05_modular_forms_exactness(battery):
    record = _check(battery, 5)
    details = record["details"]
    assert details["max_abs_eigenvalue"] <= 2.0 + 1e-9
    assert details["max_multiplicativity_error"] <= 1e-10
    assert details["eigenforms"] == 24  # all weights up to 40


def test_criterion_06_trace_formula_closure(battery):
    record = _check(battery, 6)
    assert record["details"]["max_closure_error"] < 1e-3
    assert record["details"]["max_unit_error"] < 1e-2


def test_criterion_07_watson_roundtrip(battery):
    record = _check(battery, 7)
    for stats in record["details"]["per_weight"].values():
        assert stats["watson_error"] <= 1e-3
        assert stats["parseval_error"] <= 1e-3
    assert record["details"]["min_central_value"] >= 0.0


def test_criterion_08_margin_table(battery):
    record = _check(battery, 8)
    assert record["details"]["max_recompute_drift"] <= 1e-6
    assert (battery["artifact_dir"] / "criterion_08_margins.csv").exists()
    assert record["details"]["rows"] == 6  # two partner forms x three scales


def test_criterion_09_chain_validator(battery):
    record = _check(battery, 9)
    details = record["details"]
    assert details["relative_distance_to_9.4e4"] <= 0.01
    assert details["exponent_1e5_passes"] is True
    assert details["exponent_1e4_passes"] is False
    assert (battery["artifact_dir"] / "criterion_09_chain.csv").exists()


def test_criterion_10_truncated_exp_certificates(battery):
    record = _check(battery, 10)
    details = record["details"]
    assert details["positivity_checks"] == 10 * 201
    assert details["domination_certificates"] == 10 * 101


def test_criterion_11_determinism(battery):
    record = _check(battery, 11)
    assert record["details"]["mismatched"] == []
    assert record["details"]["files_compared"] >= 3
