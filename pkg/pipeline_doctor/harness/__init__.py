"""Synthetic AutoML harness: seeded sampling, oracle scenarios, round trips"""

from .base import Scenario, ScenarioRegistry
from .runner import (
    RoundTripReport,
    SuiteResult,
    render_csv,
    render_markdown,
    run_scenario,
    run_suite,
)
from .sampler import SplitMix64, sample
from .scenarios import BUILTIN_SCENARIOS

__all__ = [
    'BUILTIN_SCENARIOS',
    'RoundTripReport',
    'Scenario',
    'ScenarioRegistry',
    'SplitMix64',
    'SuiteResult',
    'render_csv',
    'render_markdown',
    'run_scenario',
    'run_suite',
    'sample',
]
