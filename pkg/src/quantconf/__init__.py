"""quantconf: quantify how weight quantization shifts a model's confidence
and calibration from paired full/quantized prediction logs."""

__version__ = "0.1.0"

from .calibration import BinSpec, RunMetrics, ace, confidence_stats, ece, predictive_entropy
from .divergence import js_distance, jsd, kl, mean_jsd_by_model
from .quantlab import QuantConfig, QuantizedLayer, ToyModel, quantize_compensated, quantize_rtn
from .records import (
    PairedDataset,
    PairingError,
    PredictionRecord,
    RecordError,
    RunManifest,
    pair_runs,
    parse_records,
    serialize_records,
)
from .report import CompareOptions, ComparisonReport, build_report, render, run_compare
from .scoring import PredictiveDistribution, is_correct, normalize, sequence_logprob
from .shifts import ShiftProfile, shift_grid, shift_profile
from .stats import PairedTestResult, paired_t_test

__all__ = [
    "BinSpec",
    "CompareOptions",
    "ComparisonReport",
    "PairedDataset",
    "PairedTestResult",
    "PairingError",
    "PredictionRecord",
    "PredictiveDistribution",
    "QuantConfig",
    "QuantizedLayer",
    "RecordError",
    "RunManifest",
    "RunMetrics",
    "ShiftProfile",
    "ToyModel",
    "ace",
    "build_report",
    "confidence_stats",
    "ece",
    "is_correct",
    "js_distance",
    "jsd",
    "kl",
    "mean_jsd_by_model",
    "normalize",
    "pair_runs",
    "paired_t_test",
    "parse_records",
    "predictive_entropy",
    "quantize_compensated",
    "quantize_rtn",
    "render",
    "run_compare",
    "sequence_logprob",
    "serialize_records",
    "shift_grid",
    "shift_profile",
]
