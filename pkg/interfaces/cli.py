
"""
Command Line Interface for the coarse-geometry laboratory.
"""
import functools
import os
import sys
from pathlib import Path
from typing import Optional

import click
from dotenv import load_dotenv
from loguru import logger

# Add parent directory to path for imports
sys.path.insert(0, str(Path(__file__).parent.parent))

from application.use_cases import (
    CoarsePathUseCase,
    DistanceUseCase,
    HoroballUseCase,
    LamplighterCertificateUseCase,
    LamplighterTableUseCase,
    RhoUseCase,
    VerifyMetricsUseCase,
    VerifySolUseCase,
)
from domain.exceptions import (
    CoarseLabException,
    ConfigurationError,
    DimensionMismatchError,
    InvalidModelError,
    MetricNotPositiveDefiniteError,
)
from infrastructure.file_system_repository import FileSystemReportRepository
from infrastructure.logging_config import DEFAULT_LOG_FILE, setup_logging
from interfaces.config import load_config

EXIT_CHECK_FAILED = 1
EXIT_CONFIG_ERROR = 2
CONFIG_ERRORS = (ConfigurationError, InvalidModelError, DimensionMismatchError, MetricNotPositiveDefiniteError)


# Load environment variables
load_dotenv()


@click.group()
@click.option('--verbose', '-v', is_flag=True, help='Enable detailed logging')
@click.option('--log-file', default=DEFAULT_LOG_FILE,
              help=f"Log file (default: {DEFAULT_LOG_FILE}; empty to disable)")
@click.pass_context
def cli(ctx, verbose: bool, log_file: str):
    """
    Coarse-geometry laboratory: numerical distances on Heintze and Sol-type
    groups, rough-similarity experiments and lamplighter word metrics.

    Reports go to stdout (or --output); logs go to stderr.
    """
    log_level = "DEBUG" if verbose else os.getenv("COARSE_LAB_LOG_LEVEL", "INFO")
    setup_logging(log_level, log_file)

    ctx.ensure_object(dict)
    ctx.obj['verbose'] = verbose
    ctx.obj['log_file'] = log_file


def run_options(command):
    """Options shared by every subcommand."""
    options = [
        click.option('--config', 'config_path', type=click.Path(dir_okay=False), help='JSON run configuration'),
        click.option('--grid-h', type=float, help='Lattice grid step'),
        click.option('--samples', type=int, help='Number of sampled pairs'),
        click.option('--seed', type=int, help='Random seed'),
        click.option('--n-max', type=int, help='Largest n for the lamplighter families'),
        click.option('--format', 'output_format', type=click.Choice(['json', 'csv']), help='Report format'),
        click.option('--output', '-o', type=click.Path(dir_okay=False), help='Write the report to a file'),
    ]
    for option in reversed(options):
        command = option(command)
    return command


def _run(use_case_factory, config_path: Optional[str], **overrides) -> None:
    """
    Loads configuration, executes a use case, prints the report and exits
    with 0 (success), 1 (acceptance check failed) or 2 (configuration error).
    """
    fmt = overrides.pop('output_format', None)
    try:
        config = load_config(config_path, format=fmt, **overrides)
        result = use_case_factory(config).execute()
    except CONFIG_ERRORS as e:
        click.echo(f"Configuration error: {e}", err=True)
        logger.error(f"Configuration error: {e}")
        sys.exit(EXIT_CONFIG_ERROR)
    except CoarseLabException as e:
        click.echo(f"Error: {e}", err=True)
        logger.error(f"Run failed: {e}")
        sys.exit(EXIT_CHECK_FAILED)

    repository = FileSystemReportRepository()
    output = Path(config.output) if config.output else None
    if config.format == 'csv':
        text = repository.write_csv(result['header'], result['rows'], output)
    else:
        text = repository.write_json(result['report'], output)
    if output is None:
        click.echo(text, nl=False)

    if not result['passed']:
        logger.warning("Acceptance check failed")
        sys.exit(EXIT_CHECK_FAILED)


def _subcommand(name: str, factory, doc: str):
    @cli.command(name=name, help=doc)
    @run_options
    def command(config_path, grid_h, samples, seed, n_max, output_format, output):
        _run(factory, config_path, grid_h=grid_h, samples=samples, seed=seed,
             n_max=n_max, output_format=output_format, output=output)
    return command


dist = _subcommand('dist', DistanceUseCase, "Lattice distance between the configured points p and q.")
rho = _subcommand('rho', RhoUseCase, "rho, rho-tilde and critical heights of the configured points.")
coarse_path = _subcommand('coarse-path', CoarsePathUseCase, "Three-coset coarse path between p and q.")
verify_sol = _subcommand('verify-sol', VerifySolUseCase, "Lattice distance against rho on a Sol-type model.")
verify_heintze = _subcommand('verify-heintze', functools.partial(VerifyMetricsUseCase, kind='heintze'),
                             "Two frame metrics on a Heintze group through the identity map.")
verify_soltype = _subcommand('verify-soltype', functools.partial(VerifyMetricsUseCase, kind='soltype'),
                             "Two frame metrics on a Sol-type group through the identity map.")
lamplighter_table = _subcommand('lamplighter-table', LamplighterTableUseCase,
                                "Word lengths of the two lamplighter families.")
lamplighter_certificate = _subcommand('lamplighter-certificate', LamplighterCertificateUseCase,
                                      "Certificate that the two lamplighter word metrics are not roughly similar.")
horoball_lemma = _subcommand('horoball-lemma', HoroballUseCase,
                             "Shortest paths around a horoball in the hyperbolic plane.")


if __name__ == '__main__':
    cli()
