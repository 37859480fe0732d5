"""Debt stress-testing toolkit: projections, disaster scenarios, fan charts."""

from ._core import (
    ComputationError,
    DebtPath,
    MacroAssumptions,
    MacroYear,
    ValidationError,
    amplification,
    approx_step,
    baseline_path,
    debt_step,
    fan_bands,
    percentile,
    project_path,
    scenario_path,
    severity_percentile,
)

__all__ = [
    "ComputationError",
    "DebtPath",
    "MacroAssumptions",
    "MacroYear",
    "ValidationError",
    "amplification",
    "approx_step",
    "baseline_path",
    "debt_step",
    "fan_bands",
    "percentile",
    "project_path",
    "scenario_path",
    "severity_percentile",
]
