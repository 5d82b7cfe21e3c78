"""Command-line entry points."""
from __future__ import annotations

import json
from pathlib import Path

import click

from hybridsim.experiments.config import ConfigError, ExperimentConfig
from hybridsim.experiments import runners


def _common(f):
    f = click.option("--out", "out", type=click.Path(file_okay=False, path_type=Path), default=Path("out"),
                     show_default=True, help="Output directory.")(f)
    f = click.option("--seed", type=click.IntRange(min=0), default=0, show_default=True,
                     help="Seed for every random stream.")(f)
    f = click.option("--config", "config", type=click.Path(exists=True, dir_okay=False, path_type=Path),
                     default=None, help="YAML or JSON experiment config.")(f)
    return f


def _load(config: Path | None) -> ExperimentConfig:
    try:
        return ExperimentConfig.load(config) if config else ExperimentConfig()
    except ConfigError as exc:
        raise click.BadParameter(str(exc), param_hint="--config") from exc


def _run(fn, config, seed, out, summary_keys):
    cfg = _load(config)
    try:
        report = fn(cfg, seed, out)
    except ConfigError as exc:
        raise click.ClickException(str(exc)) from exc
    summary = {k: report[k] for k in summary_keys if k in report}
    click.echo(json.dumps(runners._clean(summary), sort_keys=True))


@click.group()
@click.version_option(package_name="artifact")
def main():
    """Differentiable multibody simulation with neural augmentation."""


@main.command("gen-data")
@_common
def gen_data(config, seed, out):
    """Generate ground-truth trajectory CSVs plus a manifest."""
    _run(runners.run_gen_data, config, seed, out, ["files", "tag", "steps", "dt"])


@main.command()
@_common
def identify(config, seed, out):
    """Fit analytical parameters with basin hopping from a grid of starts."""
    _run(runners.run_identify, config, seed, out, ["success_rate", "best"])


@main.command("augment-train")
@_common
def augment_train(config, seed, out):
    """Train neural-scalar blueprints on the training window."""
    _run(runners.run_augment_train, config, seed, out,
         ["hybrid_mse", "analytical_mse", "mse_ratio", "pose_error_ratio", "blueprints"])


@main.command()
@_common
def discover(config, seed, out):
    """Train with the sparse-group penalty and report which inputs stay active."""
    _run(runners.run_discover, config, seed, out, ["active_inputs", "hybrid_mse", "analytical_mse"])


@main.command("benchmark-ad")
@_common
def benchmark_ad(config, seed, out):
    """Time gradients under finite differences, forward duals and reverse tape."""
    from hybridsim.experiments.benchmark import run_benchmark

    cfg = _load(config)
    report = run_benchmark(cfg.benchmark, seed, out)
    click.echo(json.dumps(runners._clean({"mlp_scaling_exponents": report["mlp_scaling_exponents"]}), sort_keys=True))


@main.command()
@_common
def simulate(config, seed, out):
    """Roll out a model and write its trajectory."""
    _run(runners.run_simulate, config, seed, out, ["final_q", "final_qd", "max_contacts"])


if __name__ == "__main__":
    main()
