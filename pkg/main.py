#!/usr/bin/env python3
"""
main.py – self-regularized gradient descent experiments.

Usage examples:
  python main.py train  --config configs/train_one_point.conf
  python main.py cv     --config configs/cv_sine.conf --seed 3 --out out/cv
  python main.py verify --config configs/verify_quick.conf -v
  python main.py rates  --config configs/rates.conf
  python main.py run    --config configs/cv_sine.conf      (mode taken from the file)
  python main.py keys
"""

import logging
import sys

import click
from rich.console import Console
from rich.logging import RichHandler

from cli.interface import CLIInterface
from experiments import describe_keys, load_config
from utils.errors import ConfigError

console = Console()

LOG_LEVELS = {0: logging.WARNING, 1: logging.INFO}


def _setup_logging(verbose: int):
    logging.basicConfig(
        level=LOG_LEVELS.get(verbose, logging.DEBUG),
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=Console(stderr=True), show_path=verbose > 1)],
        force=True,
    )


def _execute(mode, config_path, seed, out, workers):
    from experiments.runner import EXIT_USAGE, run

    iface = CLIInterface(console)
    overrides = {"seed": seed, "out": out}
    if mode is not None:
        overrides["mode"] = mode
    try:
        config = load_config(config_path, overrides)
    except ConfigError as e:
        iface.show_error(str(e), key=e.key)
        sys.exit(EXIT_USAGE)

    result = run(config, workers=workers)
    iface.show_result(result)
    sys.exit(result.exit_code)


# ---------------------------------------------------------------------------
# CLI
# ---------------------------------------------------------------------------

run_options = [
    click.option("--config", "-c", "config_path", default=None, type=click.Path(dir_okay=False),
                 help="Config file (key = value lines); defaults apply to absent keys."),
    click.option("--seed", "-s", default=None, type=int, help="Override the config seed."),
    click.option("--out", "-o", default=None, help="Override the output directory."),
    click.option("--workers", "-w", default=None, type=click.IntRange(min=1),
                 help="Worker threads (default: SELFREG_THREADS or the CPU count)."),
]


def with_run_options(fn):
    for option in reversed(run_options):
        fn = option(fn)
    return fn


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.option("--verbose", "-v", count=True, help="-v for progress, -vv for debug output.")
def cli(verbose):
    """Early-stopped kernel gradient descent: training, hold-out selection and verification."""
    _setup_logging(verbose)


@cli.command("run")
@with_run_options
def run_cmd(config_path, seed, out, workers):
    """Run the mode named in the config file."""
    _execute(None, config_path, seed, out, workers)


@cli.command("train")
@with_run_options
def train_cmd(config_path, seed, out, workers):
    """One gradient descent run: trajectory, snapshots and an optional RERM path."""
    _execute("train", config_path, seed, out, workers)


@cli.command("cv")
@with_run_options
def cv_cmd(config_path, seed, out, workers):
    """Split, train through the stopping grid and select on the validation half."""
    _execute("cv", config_path, seed, out, workers)


@cli.command("verify")
@with_run_options
def verify_cmd(config_path, seed, out, workers):
    """Run the verification suite; exits 1 when any check fails."""
    _execute("verify", config_path, seed, out, workers)


@cli.command("rates")
@with_run_options
def rates_cmd(config_path, seed, out, workers):
    """Tabulate learning rate exponents (and optionally fit an empirical rate)."""
    _execute("rates", config_path, seed, out, workers)


@cli.command("keys")
def keys_cmd():
    """List every config key with its type and default."""
    CLIInterface(console).show_config_keys(describe_keys())


if __name__ == "__main__":
    cli()
