"""Command line interface: run, validate, and re-summarize experiments."""

from __future__ import annotations

import json
import sys

import click

from . import harness


@click.group()
def main():
    """Boundary-parameter posterior experiments."""


@main.command("run")
@click.argument("config_path", type=click.Path(exists=True))
@click.option("--seed", type=int, default=None, help="Override master_seed.")
@click.option("--threads", type=int, default=1, show_default=True)
@click.option("--resume", is_flag=True, help="Reuse completed shards in the output dir.")
@click.option("--out", type=click.Path(), default=None, help="Override output_dir.")
def run_cmd(config_path, seed, threads, resume, out):
    """Execute the experiment described by CONFIG_PATH."""
    raw = json.loads(open(config_path).read())
    if seed is not None:
        raw["master_seed"] = seed
    if out is not None:
        raw["output_dir"] = out
    try:
        cfg = harness.validate_config(raw)
    except harness.ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(2)
    result = harness.run(cfg, threads=threads, resume=resume)
    click.echo(f"config {result.config_hash}: {len(result.rows)} rows -> {result.output_dir}")
    for row in result.summary:
        click.echo(f"  n={row['n']:<7} {row['metric']:<12} median={row['median']:.6g} "
                   f"mean={row['mean']:.6g} se={row['se']:.3g}")


@main.command("validate")
@click.argument("config_path", type=click.Path(exists=True))
def validate_cmd(config_path):
    """Check CONFIG_PATH and print the normalized config and its hash."""
    try:
        cfg = harness.validate_config(config_path)
    except harness.ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(2)
    click.echo(cfg.canonical())
    click.echo(f"hash: {cfg.hash_hex()}")
    if cfg.defaults_applied:
        click.echo("defaults applied: " + ", ".join(cfg.defaults_applied))


@main.command("report")
@click.argument("out_dir", type=click.Path(exists=True))
def report_cmd(out_dir):
    """Re-derive summary.csv from rows.csv in OUT_DIR."""
    summary = harness.rederive_summary(out_dir)
    for row in summary:
        click.echo(f"n={row['n']:<7} {row['metric']:<12} median={row['median']:.6g} "
                   f"mean={row['mean']:.6g} se={row['se']:.3g}")


if __name__ == "__main__":
    main()
