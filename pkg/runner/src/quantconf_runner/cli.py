"""Command-line interface for exporting scored benchmark runs."""

from __future__ import annotations

import logging
import os
import sys
from pathlib import Path

import click

from .config import BENCHMARKS, QuantSettings, RunnerConfig
from .export import write_manifest
from .run import run_export


@click.group()
@click.version_option(version="0.1.0", prog_name="quantconf-runner")
def main() -> None:
    """Score multiple-choice benchmarks with a causal LM (full-precision or
    quantized) and export records for the calibration analysis toolkit."""
    level = os.environ.get("QUANTCONF_RUNNER_LOG", "WARNING").upper()
    logging.basicConfig(stream=sys.stderr, level=getattr(logging, level, logging.WARNING))


@main.command("export")
@click.option("--model", required=True, help="Model name or local directory.")
@click.option("--revision", default=None, help="Model revision (hub checkpoints).")
@click.option("--benchmark", required=True, type=click.Choice(BENCHMARKS))
@click.option("--dataset", "dataset_path", type=click.Path(exists=True, path_type=Path),
              default=None, help="Local JSONL of raw benchmark rows (skips hub download).")
@click.option("--out", "output_path", required=True, type=click.Path(path_type=Path))
@click.option("--quantized/--full", default=False, show_default=True)
@click.option("--bits", default=4, show_default=True)
@click.option("--group", default=128, show_default=True)
@click.option("--method", default="rtn", type=click.Choice(["rtn", "compensated"]),
              show_default=True)
@click.option("--damp", default=0.01, show_default=True)
@click.option("--calib", "calib_path", type=click.Path(exists=True, path_type=Path),
              default=None, help="Calibration texts JSONL for compensated method.")
@click.option("--limit", default=None, type=int, help="Cap the number of samples.")
@click.option("--device", default="cpu", show_default=True)
@click.option("--tokenizer", default="auto", type=click.Choice(["auto", "byte"]),
              show_default=True)
@click.option("--model-id", default=None, help="Override model_id in records.")
@click.option("--seed", default=0, show_default=True)
def export_cmd(model, revision, benchmark, dataset_path, output_path, quantized,
               bits, group, method, damp, calib_path, limit, device, tokenizer,
               model_id, seed):
    """Score one benchmark run and write wire-format records."""
    cfg = RunnerConfig(
        model=model,
        revision=revision,
        benchmark=benchmark,
        dataset_path=dataset_path,
        output_path=output_path,
        quantized=quantized,
        quant=QuantSettings(num_bits=bits, group_size=group,
                            damp_percent=damp, method=method),
        calib_path=calib_path,
        limit=limit,
        device=device,
        tokenizer=tokenizer,
        seed=seed,
    )
    try:
        path = run_export(cfg, model_id=model_id)
    except (ValueError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        raise SystemExit(1)
    click.echo(str(path))


@main.command("manifest")
@click.option("--full", "full_path", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--quantized", "quant_path", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--dataset-id", required=True)
@click.option("--classes", "num_classes", required=True, type=int)
@click.option("--out", "out_path", required=True, type=click.Path(path_type=Path))
def manifest_cmd(full_path, quant_path, dataset_id, num_classes, out_path):
    """Write a comparison manifest pairing a full and a quantized run."""
    path = write_manifest(full_path, quant_path, dataset_id, num_classes, out_path)
    click.echo(str(path))


if __name__ == "__main__":
    main()
