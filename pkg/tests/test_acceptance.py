"""Acceptance suite: one test per criterion, at the tolerances fixed in
cavitychain.benchmark.  Each test prints its own pass/fail line so the run
reads as the acceptance report."""

import pytest

from cavitychain import benchmark


def _run(index, name, fn):
    passed, detail = fn()
    print(f"\n[criterion {index:2d}] {'PASS' if passed else 'FAIL'}  {name}: {detail}")
    assert passed, f"criterion {index} ({name}): {detail}"


@pytest.mark.acceptance
def test_criterion_01_dicke_benchmark():
    _run(1, "dicke-benchmark", benchmark.check_dicke_benchmark)


@pytest.mark.acceptance
def test_criterion_02_convergence_thresholds():
    _run(2, "convergence-thresholds", benchmark.check_convergence_thresholds)


@pytest.mark.acceptance
def test_criterion_03_frame_equality():
    _run(3, "frame-equality", benchmark.check_frame_equality)


@pytest.mark.acceptance
def test_criterion_04_variational_bound():
    _run(4, "variational-bound", benchmark.check_variational_bound)


@pytest.mark.acceptance
def test_criterion_05_ising_boundary():
    _run(5, "ising-boundary", benchmark.check_ising_boundary)


@pytest.mark.acceptance
def test_criterion_06_order_diagnostics():
    _run(6, "order-diagnostics", benchmark.check_order_diagnostics)


@pytest.mark.acceptance
def test_criterion_07_xxz_scaling():
    _run(7, "xxz-scaling", benchmark.check_xxz_scaling)


@pytest.mark.acceptance
def test_criterion_08_correlation_classes():
    _run(8, "correlation-classes", benchmark.check_correlation_classes)


@pytest.mark.acceptance
def test_criterion_09_backend_cross_validation():
    _run(9, "backend-cross-validation", benchmark.check_backend_cross_validation)


@pytest.mark.acceptance
def test_criterion_10_gradient_check():
    _run(10, "gradient-check", benchmark.check_gradients)
