#!/usr/bin/env python3
# ntd.py - command line for the task decomposition pipeline
import json
import os
import sys
from functools import wraps

import click

from config import Config
from engine.datasets import SyntheticSpec
from engine.errors import NtdError
from engine.lnn import TrainConfig
from engine.nmf import NmfConfig
from engine.pipeline import TaskDecompositionPipeline
from engine.verifier import Verdict
from utils.logger import cli_logger
from utils.validators import PipelineValidator, ValidationError

_SYN = Config.SYNTHETIC_DEFAULTS


def handle_errors(command):
    """Usage and validation problems exit 2; runtime failures exit 1"""
    @wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except ValidationError as e:
            raise click.UsageError(str(e))
        except FileNotFoundError as e:
            raise click.UsageError(f"missing file: {e.filename or e}")
        except (NtdError, ValueError, KeyError) as e:
            cli_logger.error(f"{type(e).__name__}: {e}")
            click.echo(f"Error: {e}", err=True)
            sys.exit(1)
    return wrapper


def emit(result):
    click.echo(json.dumps(result, indent=2, sort_keys=True, default=str))


def split_names(text):
    return [part.strip() for part in text.split(",") if part.strip()] if text else []


@click.group()
@click.version_option(Config.TOOL_VERSION, prog_name=Config.TOOL_NAME)
def cli():
    """Decompose trained sigmoid networks into independent tasks."""


@cli.group()
def gen():
    """Generate a dataset directory."""


@gen.command("synthetic")
@click.option("--blocks", type=int, default=_SYN["blocks"], show_default=True)
@click.option("--hidden-layers", "hidden_layers_per_block", type=int, default=_SYN["hidden_layers_per_block"], show_default=True)
@click.option("--units", "units_per_hidden_layer", type=int, default=_SYN["units_per_hidden_layer"], show_default=True)
@click.option("--inputs-per-block", type=int, default=_SYN["inputs_per_block"], show_default=True)
@click.option("--outputs-per-block", type=int, default=_SYN["outputs_per_block"], show_default=True)
@click.option("--prune-threshold", type=float, default=_SYN["prune_threshold"], show_default=True)
@click.option("--input-sigma", type=float, default=_SYN["input_sigma"], show_default=True)
@click.option("--noise-sigma", type=float, default=_SYN["noise_sigma"], show_default=True)
@click.option("--n-train", type=int, default=_SYN["n_train"], show_default=True)
@click.option("--n-test", type=int, default=_SYN["n_test"], show_default=True)
@click.option("--seed", type=int, default=_SYN["seed"], show_default=True)
@click.option("--out", required=True, type=click.Path(file_okay=False), help="Run directory")
@handle_errors
def gen_synthetic_cmd(out, **fields):
    """Planted block-diagonal teacher network and noisy samples."""
    spec = SyntheticSpec(**fields)
    emit(TaskDecompositionPipeline(out).generate_synthetic(spec))


@gen.command("diagrams")
@click.option("--classes", default=",".join(Config.DIAGRAM_CLASSES), show_default=True,
              help="Comma-separated class names")
@click.option("--per-class", type=int, default=10, show_default=True)
@click.option("--size", type=int, default=Config.DIAGRAM_SIZE, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--pgm-dir", type=click.Path(file_okay=False), default=None, help="Also dump every image as PGM")
@click.option("--out", required=True, type=click.Path(file_okay=False))
@handle_errors
def gen_diagrams_cmd(classes, per_class, size, seed, pgm_dir, out):
    """Rendered diagram images with one-hot class targets."""
    emit(TaskDecompositionPipeline(out).generate_diagrams(split_names(classes), per_class, size, seed, pgm_dir))


@gen.command("window")
@click.option("--csv", "csv_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--inputs", required=True, help="Comma-separated input series columns")
@click.option("--targets", required=True, help="Comma-separated target columns")
@click.option("--window", type=int, required=True)
@click.option("--horizon", type=int, default=1, show_default=True)
@click.option("--out", required=True, type=click.Path(file_okay=False))
@handle_errors
def gen_window_cmd(csv_path, inputs, targets, window, horizon, out):
    """Sliding windows over CSV time series."""
    emit(TaskDecompositionPipeline(out).generate_window(csv_path, split_names(inputs), split_names(targets),
                                                         window, horizon))


@cli.command()
@click.option("--data", "data_dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--layers", required=True, help='Layer sizes, e.g. "108,40,40,3"')
@click.option("--lambda", "lambda_", type=float, default=Config.LAMBDA, show_default=True)
@click.option("--epsilon1", type=float, default=Config.EPSILON1, show_default=True)
@click.option("--epochs", type=int, default=Config.EPOCHS, show_default=True)
@click.option("--eta0", type=float, default=Config.ETA0, show_default=True)
@click.option("--seed", type=int, default=Config.TRAIN_SEED, show_default=True)
@click.option("--no-shuffle", is_flag=True, help="Cycle samples in order instead of sampling")
@click.option("--out", type=click.Path(file_okay=False), default=None, help="Defaults to the data directory")
@handle_errors
def train(data_dir, layers, lambda_, epsilon1, epochs, eta0, seed, no_shuffle, out):
    """Train a sigmoid network with LASSO by stochastic steepest descent."""
    sizes = PipelineValidator.parse_layers(layers)
    config = TrainConfig(lambda_=lambda_, epsilon1=epsilon1, epochs=epochs, eta0=eta0,
                         seed=seed, shuffle=not no_shuffle)
    emit(TaskDecompositionPipeline(out or data_dir).train(data_dir, sizes, config))


@cli.command()
@click.option("--model", "model_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--data", "data_dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--tasks", type=int, required=True, help="Number of tasks c0")
@click.option("--iters", type=int, default=Config.NMF_ITERATIONS, show_default=True)
@click.option("--seed", type=int, default=Config.NMF_SEED, show_default=True)
@click.option("--restarts", type=int, default=Config.NMF_RESTARTS, show_default=True)
@click.option("--split", type=click.Choice(["train", "test"]), default="train", show_default=True,
              help="Samples the effects are measured on")
@click.option("--digits", type=int, default=0, help="Also write a copy of V rounded to N significant digits")
@click.option("--threads", type=int, default=None, help="Attribution workers (default NTD_THREADS)")
@click.option("--out", type=click.Path(file_okay=False), default=None, help="Defaults to the model's directory")
@handle_errors
def decompose(model_path, data_dir, tasks, iters, seed, restarts, split, digits, threads, out):
    """Attribute hidden units and factorize their role vectors into tasks."""
    config = NmfConfig(c0=tasks, a0=iters, seed=seed, restarts=restarts)
    out = out or os.path.dirname(os.path.abspath(model_path))
    emit(TaskDecompositionPipeline(out, threads).decompose(model_path, data_dir, config, split, digits))


@cli.command()
@click.option("--decomposition", "decomposition_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--layout", default="bar", show_default=True, help="bar, grid:WxH or series:S:W")
@click.option("--data", "data_dir", type=click.Path(exists=True, file_okay=False), default=None,
              help="Dataset directory supplying axis labels")
@click.option("--out", type=click.Path(file_okay=False), default=None)
@handle_errors
def report(decomposition_path, layout, data_dir, out):
    """Render one SVG panel per task."""
    out = out or os.path.dirname(os.path.abspath(decomposition_path))
    emit(TaskDecompositionPipeline(out).report(decomposition_path, layout, data_dir))


@cli.command("eval")
@click.option("--decomposition", "decomposition_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--data", "data_dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--labels", type=click.Choice(["inferred", "planted"]), default="inferred", show_default=True,
              help="Hidden-unit truth: dominant planted block of each V row, or the teacher's own labels")
@click.option("--out", type=click.Path(file_okay=False), default=None)
@handle_errors
def evaluate(decomposition_path, data_dir, labels, out):
    """Score recovered tasks against the planted blocks."""
    out = out or os.path.dirname(os.path.abspath(decomposition_path))
    emit(TaskDecompositionPipeline(out).evaluate(decomposition_path, data_dir, labels))


@cli.command()
@click.option("--run", "run_dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--decomposition", "decomposition_path", type=click.Path(exists=True, dir_okay=False), default=None)
@handle_errors
def verify(run_dir, decomposition_path):
    """Re-check decomposition invariants and manifest hashes (PASS/WARN/FAIL)."""
    result = TaskDecompositionPipeline(run_dir).verify(decomposition_path)
    emit(result.to_dict())
    if result.verdict is Verdict.FAIL:
        sys.exit(1)


if __name__ == "__main__":
    cli()
