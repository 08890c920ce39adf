import logging
import sys
from pathlib import Path

import click

from multoeplitz.errors import ConfigError, MultoeplitzError
from multoeplitz.experiments import EXPERIMENTS
from multoeplitz.load_config import read_raw_config, validate_config
from multoeplitz.runner import emit, run

PASSING = {"PASS", "EXPLORATORY", "FOLNER", "NON-FOLNER"}


@click.group()
def cli():
    """Multiplicative and additive Toeplitz truncations: Szego-type limit sweeps."""
    pass


def _overrides(raw: dict, seed, max_size, set_file, out, format) -> dict:
    experiment = dict(raw.get("experiment", {}))
    if seed is not None:
        experiment["seed"] = seed
    if max_size is not None:
        experiment["max_size"] = max_size
    raw = {**raw, "experiment": experiment}
    if set_file is not None:
        raw["family"] = {"name": "explicit", "set_file": str(Path(set_file).resolve())}
    output = dict(raw.get("output", {}))
    if out is not None:
        output["path"] = str(Path(out).resolve())
    if format is not None:
        output["format"] = format
    raw["output"] = output
    return raw


def _fail_config(e: ConfigError):
    click.echo(f"config error: {e}", err=True)
    sys.exit(2)


@cli.command('run')
@click.option('-c', '--config', 'config_path', required=True, type=click.Path(dir_okay=False),
              help="Experiment config, TOML or JSON.")
@click.option('-o', '--out', default=None, help="Output file; stdout when neither this nor [output] path is set.")
@click.option('-f', '--format', 'format', type=click.Choice(["csv", "json"]), default=None,
              help="Output format, overrides [output] format.")
@click.option('--seed', type=click.IntRange(0, 2 ** 64 - 1), default=None, help="Overrides experiment.seed.")
@click.option('--max-size', type=click.IntRange(min=1), default=None, help="Overrides experiment.max_size.")
@click.option('--dump-matrix', default=None, help="Write the largest truncated operator as CSV re,im pairs.")
@click.option('--set-file', default=None, type=click.Path(exists=True, dir_okay=False),
              help="Run over the index sets listed in this file instead of the configured family.")
@click.option('-v', '--verbose', is_flag=True, default=False, show_default=True)
def run_command(config_path, out, format, seed, max_size, dump_matrix, set_file, verbose):
    """Run an experiment sweep and emit its records."""
    logging.basicConfig(level=logging.DEBUG if verbose else logging.INFO,
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    try:
        raw = _overrides(read_raw_config(config_path), seed, max_size, set_file, out, format)
        config = validate_config(raw, base=Path(config_path).parent)
    except ConfigError as e:
        _fail_config(e)

    try:
        result = run(config, verbose=verbose, dump_matrix=dump_matrix)
        data = emit(result, config.output.format, config.output.path)
    except ConfigError as e:
        _fail_config(e)
    except (MultoeplitzError, ValueError, OSError) as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(1)

    if config.output.path is None:
        click.echo(data.decode("utf-8"), nl=False)
    click.echo(f"{result.kind} {result.run_id}: {result.verdict}", err=True)
    for key, value in result.summary.items():
        click.echo(f"  {key}: {value}", err=True)
    sys.exit(0 if result.verdict in PASSING else 1)


@cli.command('describe')
@click.argument('kind', required=False, type=click.Choice(sorted(EXPERIMENTS)))
def describe(kind):
    """Print the statement each experiment kind checks."""
    kinds = [kind] if kind else sorted(EXPERIMENTS)
    for name in kinds:
        click.echo(EXPERIMENTS[name].describe())


@cli.command('list-experiments')
def list_experiments():
    """List the experiment kinds."""
    for name in sorted(EXPERIMENTS):
        click.echo(name)


@cli.command('validate-config')
@click.option('-c', '--config', 'config_path', required=True, type=click.Path(dir_okay=False))
def validate_config_command(config_path):
    """Validate a config without running it."""
    try:
        config = validate_config(read_raw_config(config_path), base=Path(config_path).parent)
    except ConfigError as e:
        _fail_config(e)
    family = config.family.name if config.family else "-"
    click.echo(f"{config_path}: ok ({config.experiment.kind}, family {family})")


if __name__ == '__main__':
    cli()
