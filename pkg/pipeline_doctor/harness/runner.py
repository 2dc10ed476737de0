"""Round-trip driver: sample, label, localize, remediate, resample, measure."""

import csv
import io
import logging
from dataclasses import dataclass, replace
from typing import Callable, Dict, Iterable, List, Optional, Sequence

from ..config import Config
from ..constraints import Constraint, format_constraint
from ..errors import PipelineDoctorError
from ..localizer import EvaluationTrace, solve
from ..remediator import remediate
from ..search_space import PipelineInstance, contains
from .base import Scenario
from .sampler import sample

logger = logging.getLogger(__name__)

VERDICTS = ('successful', 'restrictive', 'unsuccessful')

# Post-remediation samples come from an independent stream.
POST_SEED_OFFSET = 1_000_000


@dataclass(frozen=True)
class RoundTripReport:
    scenario: str
    seed: int
    n_evals: int
    pre_failures: int
    constraint: Optional[Constraint]
    post_failures: Optional[int]
    excluded_successes: int
    verdict: str
    reason: str = ''

    @property
    def constraint_text(self) -> str:
        return format_constraint(self.constraint) if self.constraint is not None else '-'


@dataclass(frozen=True)
class SuiteResult:
    reports: Sequence[RoundTripReport]

    def counts(self) -> Dict[str, int]:
        totals = dict.fromkeys(VERDICTS, 0)
        for report in self.reports:
            totals[report.verdict] += 1
        return totals


def label(instances: Iterable[PipelineInstance],
          oracle: Callable[[PipelineInstance], bool]) -> List[PipelineInstance]:
    return [replace(inst, result=bool(oracle(inst))) for inst in instances]


def run_scenario(scenario: Scenario, n_evals: int = 20, seed: int = 1,
                 config: Optional[Config] = None) -> RoundTripReport:
    """Run one localize-and-remediate round trip against the scenario's oracle.

    Localization and remediation errors are reported as an unsuccessful
    verdict carrying the error message.
    """
    config = config or Config()
    pipeline = scenario.pipeline()
    trace = EvaluationTrace(pipeline, tuple(label(sample(pipeline, n_evals, seed), scenario.oracle)))
    pre_failures = len(trace.failures)

    try:
        constraint = solve(trace, config.localizer)
        remediation = remediate(pipeline, constraint, config.remediation.n_splits,
                                trace.observed_values())
    except PipelineDoctorError as e:
        logger.info("%s seed %d: %s", scenario.name, seed, e)
        return RoundTripReport(scenario.name, seed, n_evals, pre_failures, None, None, 0,
                               'unsuccessful', str(e))

    post = label(sample(remediation.remediated, n_evals, seed + POST_SEED_OFFSET), scenario.oracle)
    post_failures = sum(1 for inst in post if not inst.result)
    excluded = sum(1 for inst in trace.successes if not contains(remediation.remediated, inst))
    if post_failures:
        verdict = 'unsuccessful'
    elif excluded:
        verdict = 'restrictive'
    else:
        verdict = 'successful'
    logger.info("%s seed %d: %s (%s)", scenario.name, seed, verdict, format_constraint(constraint))
    return RoundTripReport(scenario.name, seed, n_evals, pre_failures, constraint,
                           post_failures, excluded, verdict)


def run_suite(scenarios: Sequence[Scenario], seeds: Sequence[int], n_evals: int = 20,
              config: Optional[Config] = None) -> SuiteResult:
    """Every scenario against every seed, ordered by scenario then seed."""
    return SuiteResult(tuple(
        run_scenario(scenario, n_evals, seed, config)
        for scenario in scenarios
        for seed in seeds
    ))


def _failures(count: Optional[int], n: int) -> str:
    return '-' if count is None else f"{count}/{n}"


def render_markdown(result: SuiteResult) -> str:
    lines = [
        "| scenario | seed | failures before | constraint | failures after | verdict |",
        "|---|---|---|---|---|---|",
    ]
    for r in result.reports:
        verdict = f"{r.verdict}: {r.reason}" if r.reason else r.verdict
        lines.append(
            f"| {r.scenario} | {r.seed} | {_failures(r.pre_failures, r.n_evals)} | "
            f"`{r.constraint_text}` | {_failures(r.post_failures, r.n_evals)} | {verdict} |")
    counts = result.counts()
    lines += [
        "",
        "| Successful | Restrictive | Unsuccessful |",
        "|---|---|---|",
        f"| {counts['successful']} | {counts['restrictive']} | {counts['unsuccessful']} |",
    ]
    return "\n".join(lines) + "\n"


def render_csv(result: SuiteResult) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(['scenario', 'seed', 'n_evals', 'pre_failures', 'post_failures',
                     'excluded_successes', 'verdict', 'constraint', 'reason'])
    for r in result.reports:
        writer.writerow([r.scenario, r.seed, r.n_evals, r.pre_failures,
                         '' if r.post_failures is None else r.post_failures,
                         r.excluded_successes, r.verdict, r.constraint_text, r.reason])
    return buffer.getvalue()
