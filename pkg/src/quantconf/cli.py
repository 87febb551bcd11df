"""Command-line surface: validate, fixtures, compare, shifts, jsd.

Diagnostics go to stderr; data goes to stdout or files. Repeated invocations
on the same inputs produce byte-identical output.
"""

from __future__ import annotations

import json
import logging
import os
import sys
from pathlib import Path

import click
import numpy as np

from . import __version__
from .calibration import BinSpec, EQUAL_WIDTH
from .divergence import mean_jsd_by_model
from .quantlab import ERROR_COMPENSATED, RTN, QuantConfig, ToyModel, generate_fixtures
from .records import (
    RecordError,
    PairingError,
    load_manifest,
    pair_runs,
    parse_records_file,
)
from .report import CompareOptions, render, run_compare
from .scoring import RAW, SOFTMAX, normalize
from .shifts import (
    PREDICTION_CONFIDENCE,
    TRUE_CLASS_CONFIDENCE,
    default_range_start,
    profile_csv,
    shift_profile,
)


def _setup_logging() -> None:
    level = os.environ.get("QUANTCONF_LOG", "WARNING").upper()
    logging.basicConfig(stream=sys.stderr, level=getattr(logging, level, logging.WARNING))


@click.group()
@click.version_option(__version__)
def main() -> None:
    """Audit confidence and calibration changes caused by weight quantization."""
    _setup_logging()


@main.command()
@click.argument("records", type=click.Path(exists=True, dir_okay=False))
def validate(records: str) -> None:
    """Schema/invariant-check a record file; exit 0 iff valid and non-empty."""
    try:
        parsed = parse_records_file(records)
    except RecordError as exc:
        click.echo(f"invalid: {exc}", err=True)
        sys.exit(1)
    if not parsed:
        click.echo("invalid: no records", err=True)
        sys.exit(1)
    click.echo(f"ok: {len(parsed)} records")


@main.command()
@click.option("--seed", type=int, default=42, show_default=True)
@click.option("--n", "n_samples", type=int, default=500, show_default=True)
@click.option("--bits", type=int, default=4, show_default=True)
@click.option("--group", type=int, default=128, show_default=True)
@click.option(
    "--method",
    type=click.Choice(["rtn", "compensated"]),
    default="rtn",
    show_default=True,
)
@click.option("--damp", type=float, default=0.01, show_default=True)
@click.option("--classes", type=int, default=4, show_default=True)
@click.option("--out", type=click.Path(file_okay=False), required=True)
def fixtures(seed, n_samples, bits, group, method, damp, classes, out) -> None:
    """Generate a paired full/quantized record fixture with the toy model."""
    cfg = QuantConfig(
        num_bits=bits,
        group_size=group,
        damp_percent=damp,
        method=RTN if method == "rtn" else ERROR_COMPENSATED,
    )
    model = ToyModel.create(num_candidates=classes, seed=seed)
    full_path, quant_path = generate_fixtures(model, cfg, n_samples, seed, out)
    click.echo(f"wrote {full_path} and {quant_path}", err=True)
    click.echo(str(Path(out) / "manifest.json"))


def _bin_start_value(bin_start: str):
    if bin_start == "auto":
        return None
    return float(bin_start)


@main.command()
@click.option("--manifest", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--bins", type=int, default=10, show_default=True)
@click.option("--bin-start", default="auto", show_default=True)
@click.option("--alpha", type=float, default=0.05, show_default=True)
@click.option(
    "--conf-mode",
    type=click.Choice(["softmax", "raw"]),
    default="softmax",
    show_default=True,
)
@click.option(
    "--jsd-variant",
    type=click.Choice(["halved", "paper"]),
    default="halved",
    show_default=True,
)
@click.option(
    "--ce-metric",
    type=click.Choice(["auto", "ece", "ace"]),
    default="auto",
    show_default=True,
)
@click.option(
    "--format",
    "fmt",
    type=click.Choice(["markdown", "csv", "json"]),
    default="markdown",
    show_default=True,
)
@click.option("--strict", is_flag=True, help="error on unmatched sample_ids")
def compare(manifest, bins, bin_start, alpha, conf_mode, jsd_variant, ce_metric, fmt, strict):
    """Full comparison report for one manifest."""
    options = CompareOptions(
        num_bins=bins,
        bin_start=_bin_start_value(bin_start),
        alpha=alpha,
        conf_mode=SOFTMAX if conf_mode == "softmax" else RAW,
        jsd_variant="halved" if jsd_variant == "halved" else "paper_expanded",
        ce_kind=ce_metric,
        strict=strict,
    )
    try:
        report = run_compare(load_manifest(manifest), options)
    except (RecordError, PairingError, ValueError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    click.echo(render(report, fmt), nl=False)


@main.command()
@click.option("--manifest", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option(
    "--key",
    type=click.Choice(["prediction", "true-class"]),
    default="prediction",
    show_default=True,
)
@click.option("--bins", type=int, default=10, show_default=True)
@click.option("--bin-start", default="auto", show_default=True)
@click.option("--out-dir", type=click.Path(file_okay=False), required=True)
def shifts(manifest, key, bins, bin_start, out_dir):
    """Export per-bin confidence-shift CSVs plus a grid manifest."""
    key_name = PREDICTION_CONFIDENCE if key == "prediction" else TRUE_CLASS_CONFIDENCE
    try:
        m = load_manifest(manifest)
        full = parse_records_file(m.full_run_path)
        quant = parse_records_file(m.quantized_run_path)
        pairs = pair_runs(full, quant)
        k = pairs.samples[0][1].num_candidates
        start = _bin_start_value(bin_start)
        if start is None:
            start = default_range_start(k)
        profile = shift_profile(pairs, BinSpec(EQUAL_WIDTH, bins, start), key_name)
    except (RecordError, PairingError, ValueError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    model_id = quant[0].model_id
    csv_name = f"shift_{model_id}_{m.dataset_id}.csv"
    (out / csv_name).write_text(profile_csv(profile), encoding="utf-8")
    grid = {
        "cells": [
            {
                "model_id": model_id,
                "dataset_id": m.dataset_id,
                "csv": csv_name,
                "key": profile.key,
                "argmax_abs_bin": profile.argmax_abs_bin,
                "overall_mean_signed": profile.overall_mean_signed,
                "n": profile.n,
            }
        ]
    }
    (out / "grid.json").write_text(
        json.dumps(grid, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    click.echo(str(out / "grid.json"))


@main.command(name="jsd")
@click.option(
    "--manifests",
    type=click.Path(exists=True, dir_okay=False),
    multiple=True,
    required=True,
)
def jsd_cmd(manifests):
    """Mean JSD/JS-distance per model across datasets (one manifest each)."""
    entries = []
    try:
        for path in manifests:
            m = load_manifest(path)
            full = parse_records_file(m.full_run_path)
            quant = parse_records_file(m.quantized_run_path)
            pairs = pair_runs(full, quant)
            p = np.array([normalize(f).conf_true for _, f, _ in pairs.samples])
            q = np.array([normalize(qr).conf_true for _, _, qr in pairs.samples])
            entries.append((quant[0].model_id, m.dataset_id, p, q))
    except (RecordError, PairingError, ValueError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    rows = mean_jsd_by_model(entries)
    click.echo("model_id,num_datasets,mean_jsd_halved,mean_jsd_paper_expanded,mean_js_distance")
    for r in rows:
        click.echo(
            f"{r['model_id']},{r['num_datasets']},{r['mean_jsd_halved']!r},"
            f"{r['mean_jsd_paper_expanded']!r},{r['mean_js_distance']!r}"
        )


if __name__ == "__main__":
    main()
