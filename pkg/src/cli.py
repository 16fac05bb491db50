"""Command line: prepare, train, run, sweep and the full pipeline"""

import logging
from pathlib import Path
from typing import List

import click
from pydantic import ValidationError

from src.config import Config, ExperimentConfig
from src.exceptions import TailRerankError
from src.pipeline.stages import cmd_prepare, cmd_run, cmd_sweep, cmd_train, format_counts
from src.pipeline.workflow import create_workflow


def _parse_lambdas(ctx, param, value: str) -> List[float]:
    if value is None or not value.strip():
        return []
    try:
        return [float(part) for part in value.split(",") if part.strip()]
    except ValueError:
        raise click.BadParameter(f"expected comma-separated numbers, got '{value}'")


def _fail(e: Exception):
    logging.error(f"{type(e).__name__}: {e}")
    raise click.ClickException(str(e))


@click.group()
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help="Experiment YAML file")
@click.option("--out", "out_dir", default=None,
              type=click.Path(file_okay=False, path_type=Path),
              help="Output directory (overrides output_dir)")
@click.option("--seed", default=None, type=int, help="Override every seed in the config")
@click.pass_context
def cli(ctx, config_path: Path, out_dir: Path, seed: int):
    """Temporal long-tail re-ranking experiments"""
    logging.basicConfig(level=Config.LOG_LEVEL.upper(), format=Config.LOG_FORMAT)
    try:
        Config.validate()
        config = ExperimentConfig.load(config_path)
    except (ValidationError, ValueError) as e:
        raise click.ClickException(f"Invalid configuration {config_path}: {e}")

    if seed is not None:
        config = config.with_seed(seed)
    if out_dir is not None:
        config = config.with_output_dir(out_dir)
    ctx.obj = config


@cli.command()
@click.pass_obj
def prepare(config: ExperimentConfig):
    """Parse, filter and split the dataset into the prepared cache"""
    try:
        result = cmd_prepare(config)
    except (TailRerankError, ValueError, OSError) as e:
        _fail(e)
    if result["cache_hit"]:
        click.echo(f"Prepared dataset is current: {result['prepared_dir']}")
    click.echo(format_counts(result["manifest"]))


@cli.command()
@click.pass_obj
def train(config: ExperimentConfig):
    """Train the base recommender and write a checkpoint"""
    try:
        result = cmd_train(config)
    except (TailRerankError, ValueError, OSError) as e:
        _fail(e)
    click.echo(f"Final objective: {result['final_objective']:.6f}")
    click.echo(f"Checkpoint: {result['model_dir']}")


@cli.command()
@click.pass_obj
def run(config: ExperimentConfig):
    """Simulate every configured algorithm and write metrics, logs and the summary"""
    try:
        result = cmd_run(config)
    except (TailRerankError, ValueError, OSError) as e:
        _fail(e)
    click.echo(result["summary"])
    click.echo(f"Outputs: {result['runs_dir']}")


@cli.command()
@click.option("--algorithm", required=True, help="Algorithm label to sweep")
@click.option("--lambdas", required=True, callback=_parse_lambdas,
              help="Comma-separated lambda values, e.g. 0,0.05,0.1")
@click.pass_obj
def sweep(config: ExperimentConfig, algorithm: str, lambdas: List[float]):
    """Run one algorithm over several lambda values"""
    try:
        result = cmd_sweep(config, algorithm, lambdas)
    except (TailRerankError, ValueError, OSError) as e:
        _fail(e)
    click.echo(result["table"])
    click.echo(f"Sweep: {result['sweep_path']}")


@cli.command()
@click.pass_obj
def pipeline(config: ExperimentConfig):
    """prepare -> train -> run, stopping at the first failed stage"""
    try:
        final_state = create_workflow(config).invoke()
    except TailRerankError as e:
        _fail(e)
    click.echo(final_state["run_result"]["summary"])
    click.echo(f"Outputs: {final_state['run_result']['runs_dir']}")


if __name__ == "__main__":
    cli()
