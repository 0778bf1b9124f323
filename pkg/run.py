"""Command-line entry point."""
import os
import sys

import click

from halpern_rates import create_runtime
from halpern_rates.errors import ConfigurationError
from halpern_rates.models.experiment import ExperimentConfig
from halpern_rates.services.experiment_service import EXIT_CONFIG, ExperimentService
from halpern_rates.services.fuzz_service import ORACLES
from halpern_rates.utils.config_loader import load_config_file


def shared_options(command):
    """Options every experiment accepts."""
    options = [
        click.option("--config", "config_path", type=click.Path(dir_okay=False),
                     help="Experiment configuration (key = value lines or JSON)."),
        click.option("--seed", type=int, help="Override the configured seed."),
        click.option("--out", "out_dir", type=click.Path(file_okay=False),
                     help="Directory for CSV and JSON outputs."),
        click.option("--digit-budget", type=int,
                     help="Decimal digits an exact count may hold."),
        click.option("--log-estimate", is_flag=True,
                     help="Evaluate large counts as log-estimates straight away."),
    ]
    for option in reversed(options):
        command = option(command)
    return command


def _execute(command, config_path, seed, out_dir, digit_budget, log_estimate, **extra):
    runtime = create_runtime(os.getenv("HALPERN_ENV") or "default")
    with runtime.context():
        try:
            data = load_config_file(config_path) if config_path else {}
            cfg = ExperimentConfig(
                data,
                seed=seed,
                out_dir=out_dir,
                digit_budget=digit_budget,
                log_estimate=log_estimate,
            )
        except ConfigurationError as exc:
            click.echo(f"configuration error: {exc}", err=True)
            sys.exit(EXIT_CONFIG)
        if command == "fuzz":
            report = ExperimentService.run_fuzz(cfg, **extra)
        else:
            report = ExperimentService.run(command, cfg)

    for line in report.summary:
        click.echo(line)
    for path in report.files:
        click.echo(f"wrote {path}")
    click.echo(f"status: {report.status}")
    sys.exit(report.exit_code)


@click.group()
def cli():
    """Halpern iterations on CAT(kappa) model spaces."""


@cli.command()
@shared_options
def asreg(**options):
    """Asymptotic regularity: empirical indices against the closed-form rates."""
    _execute("asreg", **options)


@cli.command()
@shared_options
def meta(**options):
    """Metastability: empirical index against the tower bound."""
    _execute("meta", **options)


@cli.command()
@shared_options
def browder(**options):
    """Browder approximants: empirical index against K(eps, g, M)."""
    _execute("browder", **options)


@cli.command()
@shared_options
@click.option("--oracle", "oracles", multiple=True, type=click.Choice(ORACLES),
              help="Oracle to fuzz (repeatable; default all).")
@click.option("--trials", type=int, help="Accepted configurations per oracle.")
@click.option("--workers", type=int, help="Processes running campaigns.")
def fuzz(oracles, trials, workers, **options):
    """Randomized campaigns over the inequality oracles."""
    _execute("fuzz", oracles=list(oracles) or None, trials=trials, workers=workers, **options)


@cli.command()
@shared_options
def rates(**options):
    """Closed-form rates and the metastability tower."""
    _execute("rates", **options)


@cli.command()
def test():
    """Run the unit tests."""
    import pytest

    sys.exit(pytest.main(["-v", "tests/"]))


if __name__ == "__main__":
    cli()
