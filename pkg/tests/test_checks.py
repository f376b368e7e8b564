import json

import pytest

from conformal_balls.checks import (
    check_cyclic_axioms,
    check_operad_axioms,
    check_retraction,
    mutant_compose_off_by_one,
    mutant_cyclic_act_missing_pi,
    run_suite,
)
from conformal_balls.generators import GeneratorSpec, Twist


@pytest.fixture
def spec():
    return GeneratorSpec(2, 5, seed=3)


def test_empty_run_passes(spec):
    report = check_operad_axioms(spec, 0)
    assert report.passed and report.trials == 0 and report.max_deviation == 0.0


@pytest.mark.parametrize("suite", ["operad", "cyclic", "retraction"])
def test_suites_pass(spec, suite):
    report = run_suite(suite, spec, 15)
    assert report.passed, report.format_table()
    assert report.max_deviation <= 1e-9


def test_retraction_on_framed_inputs(spec):
    report = check_retraction(spec, 5)
    assert report.passed
    assert report.checks["framed-endpoint"] == 5


def test_unknown_suite(spec):
    with pytest.raises(ValueError):
        run_suite("nope", spec, 1)


def test_operad_suite_catches_off_by_one(spec):
    report = check_operad_axioms(spec, 30, compose=mutant_compose_off_by_one)
    assert not report.passed
    assert "nested-assoc" in report.failed_axioms()


def test_cyclic_suite_catches_missing_pi(spec):
    report = check_cyclic_axioms(spec, 30, act=mutant_cyclic_act_missing_pi)
    assert "axiom-ii" in report.failed_axioms()


def test_retraction_suite_catches_skipped_rescaling():
    report = check_retraction(GeneratorSpec(2, 5, seed=3, twist=Twist.Q), 60, rescale=False)
    assert "validity" in report.failed_axioms()


def test_failures_carry_reproduction_data(spec):
    report = check_cyclic_axioms(spec, 5, act=mutant_cyclic_act_missing_pi)
    f = report.failures[0]
    assert f.seed == spec.seed and 0 <= f.trial < 5
    assert "FAIL" in report.format_table()
    doc = json.loads(report.to_json())
    assert doc["passed"] is False and doc["failures"][0]["axiom"] == f.axiom


def test_reports_are_reproducible(spec):
    a = run_suite("cyclic", spec, 10).to_json()
    b = run_suite("cyclic", spec, 10).to_json()
    assert a == b
    assert "wall_time" not in a
    assert "wall_time" in run_suite("cyclic", spec, 1).to_json(include_timing=True)


def test_bad_t_samples(spec):
    with pytest.raises(ValueError):
        check_retraction(spec, 1, t_samples=1)
