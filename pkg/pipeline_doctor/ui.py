"""UI module for pipeline-doctor using Rich for terminal output."""

from typing import Optional

from rich import box
from rich.console import Console
from rich.panel import Panel
from rich.table import Table

from .harness.runner import SuiteResult

_VERDICT_STYLES = {
    'successful': 'green',
    'restrictive': 'yellow',
    'unsuccessful': 'red',
}


class UI:
    """Handles all terminal UI output using Rich.

    Diagnostics go to stderr so that stdout carries only command output.
    """

    def __init__(self, console: Optional[Console] = None, out: Optional[Console] = None):
        """Initialize UI with Rich consoles for diagnostics and results."""
        self.console = console or Console(stderr=True)
        self.out = out or Console()

    def show_error(self, error: str, hint: Optional[str] = None) -> None:
        """Display an error message in a styled panel.

        Args:
            error: The error message to display
            hint: Optional follow-up advice shown under the error
        """
        error_msg = f"[bold red]Error:[/bold red] {error}"
        if hint:
            error_msg += f"\n[dim]{hint}[/dim]"

        error_panel = Panel(
            error_msg,
            title="[red]Error[/red]",
            border_style="red",
            box=box.ROUNDED
        )
        self.console.print(error_panel)

    def show_status(self, message: str) -> None:
        self.console.print(f"[dim cyan]{message}[/dim cyan]")

    def show_suite(self, result: SuiteResult) -> None:
        """Render round-trip reports and the verdict summary as tables.

        Args:
            result: Reports from a scenario suite or a single run
        """
        table = Table(title="Round trips", box=box.ROUNDED)
        for column in ("scenario", "seed", "failures before", "constraint", "failures after", "verdict"):
            table.add_column(column)
        for r in result.reports:
            after = '-' if r.post_failures is None else f"{r.post_failures}/{r.n_evals}"
            style = _VERDICT_STYLES[r.verdict]
            table.add_row(
                r.scenario,
                str(r.seed),
                f"{r.pre_failures}/{r.n_evals}",
                r.constraint_text,
                after,
                f"[{style}]{r.verdict}[/{style}]",
            )
        self.out.print(table)

        counts = result.counts()
        summary = Table(box=box.SIMPLE)
        for verdict in counts:
            summary.add_column(verdict.capitalize(), style=_VERDICT_STYLES[verdict])
        summary.add_row(*(str(n) for n in counts.values()))
        self.out.print(summary)

    def print(self, *args, **kwargs) -> None:
        """Direct access to console.print for simple output.

        Args:
            *args: Arguments to pass to console.print
            **kwargs: Keyword arguments to pass to console.print
        """
        self.console.print(*args, **kwargs)
