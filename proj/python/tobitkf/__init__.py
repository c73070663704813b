"""Tobit Kalman filter and its adaptive variant, with the benchmark scenarios."""

import json

from ._tobitkf import (
    DimensionError,
    Filter,
    UsageError,
    censored_mean,
    censored_moments_oracle,
    censored_total_variance,
    censored_variance_term,
    eth,
    eth_complement,
    inverse_mills,
    normal_cdf,
    normal_pdf,
    run_json,
    scenario_names,
    simulate,
)


def run(scenario, filters=("kf", "akf", "tkf", "atkf"), **kwargs):
    """Runs a scenario and returns the metrics summary as a dict."""
    return json.loads(run_json(scenario, list(filters), **kwargs))


__all__ = [
    "DimensionError",
    "Filter",
    "UsageError",
    "censored_mean",
    "censored_moments_oracle",
    "censored_total_variance",
    "censored_variance_term",
    "eth",
    "eth_complement",
    "inverse_mills",
    "normal_cdf",
    "normal_pdf",
    "run",
    "scenario_names",
    "simulate",
]
