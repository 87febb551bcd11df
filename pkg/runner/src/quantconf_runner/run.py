"""End-to-end run driver: load model, optionally quantize, score, export."""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import List, Optional

import torch

from .benchmarks import Sample, load_samples
from .config import RunnerConfig
from .export import export_run
from .quantize import quantize_model
from .scoring import score_all
from .tokenizer import load_tokenizer

log = logging.getLogger(__name__)


def load_model(cfg: RunnerConfig):
    from transformers import AutoModelForCausalLM

    model = AutoModelForCausalLM.from_pretrained(cfg.model, revision=cfg.revision)
    model.to(cfg.device)
    model.eval()
    return model


def _calibration_batches(
    cfg: RunnerConfig, tokenizer, samples: List[Sample]
) -> List[torch.Tensor]:
    """Token batches for Hessian accumulation.

    Uses ``calib_path`` (a JSONL of {"text": ...} rows) when given, otherwise
    falls back to the benchmark contexts themselves.
    """
    texts: List[str] = []
    if cfg.calib_path is not None:
        with open(cfg.calib_path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    texts.append(json.loads(line)["text"])
    else:
        texts = [s.context for s in samples]
    batches = []
    for text in texts:
        ids = list(tokenizer.encode(text))
        if len(ids) >= 2:
            batches.append(torch.tensor([ids], dtype=torch.long, device=cfg.device))
    if not batches:
        raise ValueError("no usable calibration texts")
    return batches


def default_model_id(cfg: RunnerConfig) -> str:
    base = Path(cfg.model).name or cfg.model
    if cfg.quantized:
        return f"{base}-{cfg.quant.tag}"
    return f"{base}-full"


def run_export(cfg: RunnerConfig, model_id: Optional[str] = None) -> Path:
    """Score the benchmark with the (optionally quantized) model and write
    one wire-format record file at ``cfg.output_path``."""
    cfg.validate()
    torch.manual_seed(cfg.seed)
    tokenizer = load_tokenizer(cfg.tokenizer, cfg.model, cfg.revision)
    samples = load_samples(cfg.benchmark, cfg.dataset_path, cfg.limit)
    model = load_model(cfg)
    if cfg.quantized:
        calib = None
        if cfg.quant.method == "compensated":
            calib = _calibration_batches(cfg, tokenizer, samples)
        quantize_model(model, cfg.quant, calib)
    scored = score_all(model, tokenizer, samples, cfg.device)
    mid = model_id or default_model_id(cfg)
    path = export_run(scored, cfg.benchmark, mid, cfg.output_path)
    log.info("wrote %d records to %s", len(scored), path)
    return path
