"""Command-line interface for pipeline-doctor."""

import json
import logging
import traceback
from contextlib import contextmanager
from dataclasses import replace
from pathlib import Path
from typing import Annotated, Iterator, Optional

import typer
import yaml
from rich.console import Console
from rich.logging import RichHandler

from .config import Config, load_config, resolve_splits
from .constraints import Constraint, constraint_from_json, constraint_to_json, format_constraint
from .errors import PipelineDoctorError
from .explainer import explain
from .harness import ScenarioRegistry, render_csv, render_markdown, run_scenario, run_suite
from .harness.runner import SuiteResult
from .localizer import solve
from .printkit import dump_pipeline, format_instance, load_pipeline, parse_dsl, pipeline_diff, pretty_print
from .remediator import remediate as remediate_pipeline
from .search_space import pipeline_to_json
from .traces import read_trace
from .ui import UI

logger = logging.getLogger(__name__)

# Initialize Typer app
app = typer.Typer(
    help="Localize, remediate and explain failures in AutoML planned pipelines",
    rich_markup_mode="rich"
)

ConfigOption = Annotated[Optional[str], typer.Option("--config", help="Path to configuration file")]
VerboseOption = Annotated[bool, typer.Option("--verbose", "-v", help="Show debug logging and tracebacks")]
PipelineOption = Annotated[Path, typer.Option("--pipeline", "-p", help="Planned pipeline (.json or .mpl)")]


def _setup_logging(verbose: bool) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(message)s",
        handlers=[RichHandler(console=Console(stderr=True), show_path=False)],
        force=True,
    )


@contextmanager
def _session(config_path: Optional[str], verbose: bool) -> Iterator[Config]:
    """Load configuration and map failures onto exit codes.

    Domain errors exit with their own code, I/O and decoding problems exit 1.
    """
    _setup_logging(verbose)
    ui = UI()
    try:
        yield Config.from_dict(load_config(config_path))
    except typer.Exit:
        raise
    except PipelineDoctorError as e:
        ui.show_error(str(e))
        if verbose:
            traceback.print_exc()
        raise typer.Exit(code=e.exit_code) from e
    except (OSError, json.JSONDecodeError, yaml.YAMLError) as e:
        ui.show_error(str(e))
        if verbose:
            traceback.print_exc()
        raise typer.Exit(code=1) from e


def _emit(text: str, output: Optional[Path]) -> None:
    if output is None:
        typer.echo(text, nl=False)
    else:
        output.write_text(text)


def _constraint_text(c: Constraint) -> str:
    return json.dumps(constraint_to_json(c)) + "\n"


@app.command()
def localize(
    pipeline: PipelineOption,
    evals: Annotated[Path, typer.Option("--evals", "-e", help="JSONL trace of evaluated instances")],
    max_depth: Annotated[Optional[int], typer.Option("--max-depth", help="Deepest if-then-else nesting")] = None,
    output: Annotated[Optional[Path], typer.Option("--output", "-o", help="Write the constraint here")] = None,
    config: ConfigOption = None,
    verbose: VerboseOption = False,
):
    """Find a constraint that separates successful from failed instances."""
    with _session(config, verbose) as cfg:
        planned = load_pipeline(pipeline)
        trace = read_trace(evals, planned)
        settings = cfg.localizer if max_depth is None else replace(cfg.localizer, max_depth=max_depth)
        c = solve(trace, settings)
        logger.info("root cause: %s", format_constraint(c))
        _emit(_constraint_text(c), output)


@app.command()
def remediate(
    pipeline: PipelineOption,
    constraint: Annotated[Optional[Path], typer.Option("--constraint", "-c", help="Constraint JSON file")] = None,
    evals: Annotated[Optional[Path], typer.Option(
        "--evals", "-e",
        help="JSONL trace; localizes the constraint unless --constraint is given, and bounds open domains"
    )] = None,
    splits: Annotated[Optional[int], typer.Option("--splits", help="Buckets per comparison rewrite")] = None,
    output: Annotated[Optional[Path], typer.Option("--output", "-o", help="Write the remediated pipeline here")] = None,
    record: Annotated[Optional[Path], typer.Option("--record", help="Write the full remediation record")] = None,
    show_explanation: Annotated[bool, typer.Option("--explain", help="Print the fix in plain words")] = False,
    show_diff: Annotated[bool, typer.Option("--diff", help="Print a markdown diff of the pipeline")] = False,
    config: ConfigOption = None,
    verbose: VerboseOption = False,
):
    """Rewrite a planned pipeline so it avoids the failing region."""
    ui = UI()
    if constraint is None and evals is None:
        ui.show_error("one of --constraint and --evals is required")
        raise typer.Exit(code=1)

    with _session(config, verbose) as cfg:
        planned = load_pipeline(pipeline)
        n_splits = resolve_splits(splits, cfg)
        trace = read_trace(evals, planned) if evals is not None else None
        if constraint is not None:
            c = constraint_from_json(json.loads(constraint.read_text()))
        else:
            c = solve(trace, cfg.localizer)
        observed = trace.observed_values() if trace is not None else None

        result = remediate_pipeline(planned, c, n_splits, observed)
        pipeline_json = json.dumps(pipeline_to_json(result.remediated), indent=2) + "\n"

        if output is not None:
            dump_pipeline(result.remediated, output)
        elif not (show_explanation or show_diff):
            typer.echo(pipeline_json, nl=False)
        if record is not None:
            record.write_text(json.dumps(result.to_json(), indent=2) + "\n")
        if show_explanation:
            typer.echo(explain(c).text)
        if show_diff:
            typer.echo(pipeline_diff(planned, result.remediated))


@app.command("print")
def print_pipeline(
    pipeline: PipelineOption,
    evals: Annotated[Optional[Path], typer.Option("--evals", "-e", help="Also list these instances")] = None,
    config: ConfigOption = None,
    verbose: VerboseOption = False,
):
    """Print a planned pipeline as combinator source."""
    with _session(config, verbose):
        planned = load_pipeline(pipeline)
        typer.echo(pretty_print(planned).text, nl=False)
        if evals is not None:
            for inst in read_trace(evals, planned).instances:
                typer.echo(format_instance(inst))


@app.command()
def diff(
    before: Annotated[Path, typer.Argument(help="Original planned pipeline")],
    after: Annotated[Path, typer.Argument(help="Changed planned pipeline")],
    config: ConfigOption = None,
    verbose: VerboseOption = False,
):
    """Show a markdown diff between two planned pipelines."""
    with _session(config, verbose):
        typer.echo(pipeline_diff(load_pipeline(before), load_pipeline(after)))


@app.command()
def roundtrip(
    pipeline: PipelineOption,
    config: ConfigOption = None,
    verbose: VerboseOption = False,
):
    """Check that printing, parsing and printing again is a fixpoint."""
    ui = UI()
    with _session(config, verbose):
        planned = load_pipeline(pipeline)
        first = pretty_print(planned).text
        reparsed = parse_dsl(first)
        second = pretty_print(reparsed).text
        if first != second:
            ui.show_error("printed source changes after reparsing")
            ui.print(pipeline_diff(planned, reparsed))
            raise typer.Exit(code=1)
        ui.show_status("roundtrip ok")


@app.command()
def simulate(
    scenario: Annotated[Optional[str], typer.Option("--scenario", "-s", help="Scenario name")] = None,
    seed: Annotated[Optional[int], typer.Option("--seed", help="Sampler seed")] = None,
    n_evals: Annotated[Optional[int], typer.Option("--evals", "-n", help="Instances sampled per run")] = None,
    suite: Annotated[bool, typer.Option("--suite", help="Run every scenario")] = False,
    report_format: Annotated[Optional[str], typer.Option(
        "--format", "-f",
        help="Report format (markdown, csv, table)"
    )] = None,
    list_scenarios: Annotated[bool, typer.Option("--list", help="List scenarios and exit")] = False,
    config: ConfigOption = None,
    verbose: VerboseOption = False,
):
    """Run localize-and-remediate round trips on synthetic scenarios."""
    ui = UI()
    if list_scenarios:
        for name in ScenarioRegistry.list_available():
            typer.echo(name)
        return
    if scenario is None and not suite:
        ui.show_error("--scenario is required unless --suite is given",
                      hint=f"Available: {', '.join(ScenarioRegistry.list_available())}")
        raise typer.Exit(code=1)

    with _session(config, verbose) as cfg:
        harness = replace(
            cfg.harness,
            n_evals=cfg.harness.n_evals if n_evals is None else n_evals,
            report_format=report_format or cfg.harness.report_format,
        )
        if suite:
            seeds = harness.seeds if seed is None else (seed,)
            scenarios = [ScenarioRegistry.create(name) for name in ScenarioRegistry.list_available()]
            result = run_suite(scenarios, seeds, harness.n_evals, cfg)
        else:
            run_seed = harness.seeds[0] if seed is None else seed
            result = SuiteResult((run_scenario(ScenarioRegistry.create(scenario), harness.n_evals,
                                               run_seed, cfg),))

        if harness.report_format == 'table':
            ui.show_suite(result)
        elif harness.report_format == 'csv':
            typer.echo(render_csv(result), nl=False)
        else:
            typer.echo(render_markdown(result), nl=False)


if __name__ == "__main__":
    app()
