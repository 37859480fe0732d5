"""End-to-end smoke tests for the python bindings.

Requires DEBTLAB_MANIFEST to point at the replication manifest; ctest sets it.
"""

import math
import os

import pytest

import debtlab

MANIFEST = os.environ["DEBTLAB_MANIFEST"]


def test_debt_step_matches_hand_computation():
    year = debtlab.MacroYear(g=0.03, pi=0.02, i=0.025, pb=0.005, of=0.001)
    expected = 0.80 * 1.025 / (1.03 * 1.02) - 0.005 + 0.001
    assert debtlab.debt_step(0.80, year) == pytest.approx(expected, abs=1e-15)
    assert debtlab.amplification(year) == pytest.approx(-0.025, abs=1e-15)
    assert debtlab.approx_step(0.80, year) == pytest.approx(
        -0.025 * 0.80 - 0.005 + 0.001, abs=1e-15
    )


def test_project_path_from_explicit_assumptions():
    years = [debtlab.MacroYear(g=0.02, pi=0.02, i=0.03, pb=0.0) for _ in range(3)]
    assumptions = debtlab.MacroAssumptions(start_year=2026, years=years)
    path = debtlab.project_path(0.6, assumptions)
    assert len(path) == 3
    assert path.year_at(0) == 2026
    d = 0.6
    for k in range(3):
        d = debtlab.debt_step(d, years[k])
        assert path.d[k] == pytest.approx(d, abs=0.0)


def test_percentile_interpolation():
    assert debtlab.percentile([4.0, 1.0, 3.0, 2.0], 0.5) == pytest.approx(2.5)
    assert debtlab.percentile([4.0, 1.0, 3.0, 2.0], 0.25) == pytest.approx(1.75)
    # adverse side selection: 'up' reads the upper tail
    xs = [float(v) for v in range(1, 11)]
    assert debtlab.severity_percentile(xs, 0.05, "up") == debtlab.percentile(xs, 0.95)
    assert debtlab.severity_percentile(xs, 0.05, "down") == debtlab.percentile(xs, 0.05)


def test_baseline_path_endpoints():
    path = debtlab.baseline_path(MANIFEST)
    assert path.year_at(0) == 2025
    assert len(path) == 7
    assert path.at_year(2025) == pytest.approx(0.5738, abs=5e-4)
    assert path.at_year(2031) == pytest.approx(0.5509, abs=5e-4)
    extended = debtlab.baseline_path(MANIFEST, horizon_end=2040)
    assert extended.at_year(2040) == pytest.approx(0.5307, abs=5e-4)


def test_scenario_paths_sit_above_baseline():
    baseline = debtlab.baseline_path(MANIFEST)
    for mode in ("one_off", "per_period", "local_projection", "quantile_regression"):
        shocked = debtlab.scenario_path(MANIFEST, mode)
        assert shocked.at_year(2031) > baseline.at_year(2031), mode
    assert debtlab.scenario_path(MANIFEST, "one_off").at_year(2031) == pytest.approx(
        0.7235, abs=2e-3
    )


def test_fan_bands_are_ordered():
    bands = debtlab.fan_bands(MANIFEST, iterations=800)
    levels = sorted(bands)
    assert levels[0] == pytest.approx(0.10)
    assert levels[-1] == pytest.approx(0.90)
    horizon = len(bands[levels[0]])
    assert horizon == 7
    for lo, hi in zip(levels, levels[1:]):
        for t in range(horizon):
            assert bands[lo][t] <= bands[hi][t]
    for level in levels:
        assert all(math.isfinite(v) for v in bands[level])


def test_fan_bands_same_seed_reproduce():
    a = debtlab.fan_bands(MANIFEST, iterations=300, seed=7)
    b = debtlab.fan_bands(MANIFEST, iterations=300, seed=7)
    assert a == b
    c = debtlab.fan_bands(MANIFEST, iterations=300, seed=8)
    assert a != c


def test_validation_errors_surface_as_value_error():
    assert issubclass(debtlab.ValidationError, ValueError)
    assert issubclass(debtlab.ComputationError, RuntimeError)
    with pytest.raises(ValueError):
        debtlab.scenario_path(MANIFEST, "nonsense")
    with pytest.raises(ValueError):
        debtlab.baseline_path("/nonexistent/manifest.json")
    with pytest.raises(ValueError):
        debtlab.percentile([], 0.5)


def test_out_of_range_year_raises():
    path = debtlab.baseline_path(MANIFEST)
    with pytest.raises(IndexError):
        path.at_year(1990)
