"""Benchmark scoring runner producing records for the calibration analysis
toolkit (the ``quantconf`` package).

The runner evaluates a causal language model — full precision or quantized in
place — on multiple-choice benchmarks and exports per-sample candidate
log-probabilities in the toolkit's newline-delimited JSON wire format.
"""

from .benchmarks import ADAPTERS, Sample, load_local, load_samples
from .config import BENCHMARKS, QuantSettings, RunnerConfig
from .export import export_run, write_manifest
from .quantize import quantize_model, rtn_quantize_weight
from .run import default_model_id, run_export
from .scoring import ScoredSample, score_all, score_candidates
from .tokenizer import ByteTokenizer, load_tokenizer

__version__ = "0.1.0"

__all__ = [
    "ADAPTERS",
    "BENCHMARKS",
    "ByteTokenizer",
    "QuantSettings",
    "RunnerConfig",
    "Sample",
    "ScoredSample",
    "default_model_id",
    "export_run",
    "load_local",
    "load_samples",
    "load_tokenizer",
    "quantize_model",
    "rtn_quantize_weight",
    "run_export",
    "score_all",
    "score_candidates",
    "write_manifest",
]
