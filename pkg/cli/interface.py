"""
Rich-powered terminal reports for experiment runs.

Provides:
  - Trajectory table (risk, step sizes, snapshot norms)
  - CV report with the selected stopping time highlighted
  - Verification check table
  - Rate exponent table and empirical rate fit
  - Config key reference
"""

from typing import Any, Dict, List, Optional, Sequence

from rich import box
from rich.console import Console
from rich.panel import Panel
from rich.table import Table
from rich.text import Text

from utils.export import trajectory_rows

console = Console()

TRAJECTORY_PREVIEW = 12
RATE_COLUMNS = ("beta", "gamma", "theta", "q", "alpha", "simple_rho", "simple_rate", "reference_gd")

# ---------------------------------------------------------------------------
# Formatting helpers
# ---------------------------------------------------------------------------


def _fmt(value: Any, digits: int = 6) -> str:
    if value is None:
        return "–"
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, float):
        return f"{value:.{digits}g}"
    return str(value)


def _preview_steps(total: int, limit: int = TRAJECTORY_PREVIEW) -> List[int]:
    """All steps when few, otherwise the first and last few."""
    if total <= limit:
        return list(range(total))
    head = limit // 2
    return list(range(head)) + list(range(total - (limit - head), total))


def _slack_style(slack: float, tolerance: float) -> str:
    if slack != slack or slack < -tolerance:
        return "bold red"
    if slack < tolerance:
        return "bold yellow"
    return "green"


# ---------------------------------------------------------------------------
# CLIInterface
# ---------------------------------------------------------------------------

class CLIInterface:
    """Renders a RunResult (and the config schema) on a rich console."""

    def __init__(self, out: Optional[Console] = None):
        self.console = out or console

    # ------------------------------------------------------------------
    # Run results
    # ------------------------------------------------------------------

    def show_result(self, result) -> None:
        if result.trajectory is not None and result.mode == "train":
            self.show_trajectory(result.trajectory)
        if result.cv is not None:
            self.show_cv_report(result.cv.report)
        if result.checks:
            self.show_checks(result.checks)
        if result.rates:
            self.show_rates(result.rates)
        if result.empirical:
            self.show_empirical(result.empirical, result.summary.get("empirical_slope"))
        if result.error:
            self.show_error(result.error)
        self.show_summary(result)

    def show_trajectory(self, traj) -> None:
        rows = trajectory_rows(traj)
        tbl = Table(title="Gradient Descent Trajectory", box=box.ROUNDED, header_style="bold cyan")
        tbl.add_column("Step", style="cyan", justify="right")
        tbl.add_column("eta", justify="right")
        tbl.add_column("S_k", justify="right")
        tbl.add_column("Risk", justify="right")
        tbl.add_column("||grad||²", justify="right")
        tbl.add_column("||f||", justify="right")

        shown = _preview_steps(len(rows))
        for i, k in enumerate(shown):
            if i > 0 and k != shown[i - 1] + 1:
                tbl.add_row("…", "", "", "", "", "")
            row = rows[k]
            tbl.add_row(
                str(row["step"]), _fmt(row["eta"]), _fmt(row["cum_step"]), _fmt(row["risk"]),
                _fmt(row["grad_sq_norm"]), _fmt(row["norm"]),
            )
        self.console.print(tbl)
        if traj.cap_violations:
            self.console.print(
                f"[yellow]⚠ {len(traj.cap_violations)} step(s) above the cap 1/M' = {traj.step_cap:.6g}[/]"
            )

    def show_cv_report(self, report) -> None:
        tbl = Table(title="Early Stopping by Hold-Out Validation", box=box.ROUNDED, header_style="bold cyan")
        tbl.add_column("t", style="cyan", justify="right")
        tbl.add_column("Psi(t)", justify="right")
        tbl.add_column("Train", justify="right")
        tbl.add_column("Validation", justify="right")
        tbl.add_column("Test", justify="right")
        tbl.add_column("Matched λ", justify="right")

        times = list(report.grid.times)
        psi = dict(zip(reversed(times), report.grid.psi_values))
        for t in times:
            style = "bold green" if t == report.selected_time else ""
            tbl.add_row(
                Text(str(t), style=style),
                _fmt(psi[t]),
                _fmt(report.train_risks.get(t)),
                Text(_fmt(report.validation_risks[t]), style=style),
                _fmt(report.test_risks.get(t)),
                _fmt(report.matched_lambdas.get(t)),
            )
        self.console.print(tbl)
        self.console.print(
            f"[green]✓ selected t = {report.selected_time}[/]  "
            f"[dim](clip level {report.clip_level:.6g}, expansion factor {report.grid.expansion_factor:.6g})[/]"
        )

    def show_checks(self, checks: Sequence) -> None:
        tbl = Table(title="Verification Checks", box=box.ROUNDED, header_style="bold cyan")
        tbl.add_column("Check", style="cyan", no_wrap=True)
        tbl.add_column("Instances", justify="right")
        tbl.add_column("Violations", justify="right")
        tbl.add_column("Worst slack", justify="right")
        tbl.add_column("Status", no_wrap=True)

        for c in checks:
            if c.passed:
                status = Text("✓", style="bold green")
            elif c.instances == 0:
                status = Text("? no instances", style="bold yellow")
            else:
                status = Text("✗ FAIL", style="bold red")
            tbl.add_row(
                c.name,
                str(c.instances),
                Text(str(c.violations), style="bold red" if c.violations else ""),
                Text(_fmt(c.worst_slack, 4), style=_slack_style(c.worst_slack, c.tolerance)),
                status,
            )
        self.console.print(tbl)

        failed = [c for c in checks if not c.passed]
        for c in failed:
            violated = [d for d in c.details if not d[1] <= d[2]][:3]
            worst = "; ".join(f"{inst}: {_fmt(lhs)} > {_fmt(rhs)}" for inst, lhs, rhs in violated)
            self.console.print(f"  [red]{c.name}[/] {worst or 'no recorded instances'}")

    def show_rates(self, rows: List[Dict[str, Any]]) -> None:
        tbl = Table(title="Learning Rate Exponents", box=box.ROUNDED, header_style="bold cyan")
        for col in RATE_COLUMNS:
            tbl.add_column(col, justify="right")
        for row in rows:
            tbl.add_row(*(_fmt(row[col], 4) for col in RATE_COLUMNS))
        self.console.print(tbl)

    def show_empirical(self, rows: List[Dict[str, Any]], slope: Optional[float]) -> None:
        tbl = Table(title="Empirical Excess Risk", box=box.ROUNDED, header_style="bold cyan")
        tbl.add_column("n", style="cyan", justify="right")
        tbl.add_column("Mean excess", justify="right")
        tbl.add_column("Std", justify="right")
        for row in rows:
            tbl.add_row(str(row["n"]), _fmt(row["mean_excess"]), _fmt(row["std_excess"]))
        self.console.print(tbl)
        if slope is not None:
            self.console.print(f"[bold]log-log slope:[/] {_fmt(slope, 4)}")

    def show_summary(self, result) -> None:
        tbl = Table(box=box.SIMPLE, show_header=False)
        tbl.add_column("Key", style="bold yellow")
        tbl.add_column("Value")
        for key in sorted(result.summary):
            if key in ("config", "artifacts", "grid"):
                continue
            tbl.add_row(key, _fmt(result.summary[key]))
        for name, path in sorted(result.artifacts.items()):
            tbl.add_row(f"→ {name}", str(path))

        style = "green" if result.exit_code == 0 else "red"
        title = f"{result.mode} · exit {result.exit_code}"
        self.console.print(Panel(tbl, title=title, border_style=style))

    def show_error(self, message: str, key: Optional[str] = None) -> None:
        body = f"[bold]{key}[/bold]\n{message}" if key else message
        self.console.print(Panel(body, title="Error", border_style="red"))

    # ------------------------------------------------------------------
    # Config reference
    # ------------------------------------------------------------------

    def show_config_keys(self, keys: Dict[str, Dict[str, Any]]) -> None:
        tbl = Table(title="Config Keys", box=box.SIMPLE, header_style="bold cyan")
        tbl.add_column("Key", style="bold cyan", no_wrap=True)
        tbl.add_column("Type", style="dim")
        tbl.add_column("Default")
        tbl.add_column("Description")
        for key, info in keys.items():
            default = info["default"]
            if isinstance(default, tuple):
                default = ",".join(_fmt(v) for v in default) if default else "(empty)"
            tbl.add_row(key, info["type"], _fmt(default), info["desc"])
        self.console.print(tbl)
