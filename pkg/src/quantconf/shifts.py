"""Per-confidence-bin signed/absolute confidence changes after quantization.

Samples are binned by the baseline run's confidence (the full model by
default); shifts are always quantized minus full.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .calibration import BinSpec, EQUAL_WIDTH, assign_equal_width_bins
from .records import PairedDataset
from .scoring import SOFTMAX, normalize

PREDICTION_CONFIDENCE = "prediction_confidence"
TRUE_CLASS_CONFIDENCE = "true_class_confidence"


@dataclass(frozen=True)
class ShiftProfile:
    bin_edges: tuple[float, ...]
    counts: tuple[int, ...]
    mean_signed_shift: tuple[Optional[float], ...]  # None for empty bins
    mean_abs_shift: tuple[Optional[float], ...]
    argmax_abs_bin: Optional[int]  # among non-empty bins; ties -> lowest
    overall_mean_signed: float
    key: str
    n: int

    def rows(self) -> list[dict]:
        out = []
        for i in range(len(self.counts)):
            out.append(
                {
                    "bin_lo": self.bin_edges[i],
                    "bin_hi": self.bin_edges[i + 1],
                    "count": self.counts[i],
                    "mean_signed": self.mean_signed_shift[i],
                    "mean_abs": self.mean_abs_shift[i],
                }
            )
        return out


def default_range_start(num_candidates: int) -> float:
    """Lower bin edge 1/K: predicted-class confidences below it are
    impossible (0.5 for binary, 0.25 for four-way tasks)."""
    return 1.0 / num_candidates


def shift_profile(
    pairs: PairedDataset,
    bins: Optional[BinSpec] = None,
    key: str = PREDICTION_CONFIDENCE,
    conf_mode: str = SOFTMAX,
    bin_on: str = "full",
) -> ShiftProfile:
    """Bin pairs by the baseline run's key value and average the per-bin
    confidence shifts (quantized - full). bin_on selects which run supplies
    the binning key (swap tests bin on "quantized")."""
    if key not in (PREDICTION_CONFIDENCE, TRUE_CLASS_CONFIDENCE):
        raise ValueError(f"unknown shift key: {key!r}")
    if bin_on not in ("full", "quantized"):
        raise ValueError(f"unknown bin_on: {bin_on!r}")
    if not pairs.samples:
        raise ValueError("empty paired dataset")
    k = pairs.samples[0][1].num_candidates
    if bins is None:
        bins = BinSpec(EQUAL_WIDTH, 10, default_range_start(k))
    bins.validate()
    if bins.strategy != EQUAL_WIDTH:
        raise ValueError("shift profiles require equal_width binning")

    full_vals = np.empty(len(pairs.samples))
    quant_vals = np.empty(len(pairs.samples))
    for i, (_, f, q) in enumerate(pairs.samples):
        df = normalize(f, conf_mode)
        dq = normalize(q, conf_mode)
        if key == PREDICTION_CONFIDENCE:
            full_vals[i] = df.confidence
            quant_vals[i] = dq.confidence
        else:
            full_vals[i] = df.conf_true
            quant_vals[i] = dq.conf_true
    diff = quant_vals - full_vals
    key_vals = full_vals if bin_on == "full" else quant_vals
    idx = assign_equal_width_bins(key_vals, bins)
    m = bins.num_bins
    counts = np.bincount(idx, minlength=m)
    signed_sum = np.bincount(idx, weights=diff, minlength=m)
    abs_sum = np.bincount(idx, weights=np.abs(diff), minlength=m)

    mean_signed: list[Optional[float]] = []
    mean_abs: list[Optional[float]] = []
    argmax: Optional[int] = None
    best = -1.0
    for b in range(m):
        if counts[b] == 0:
            mean_signed.append(None)
            mean_abs.append(None)
            continue
        ms = signed_sum[b] / counts[b]
        ma = abs_sum[b] / counts[b]
        mean_signed.append(float(ms))
        mean_abs.append(float(ma))
        if ma > best:
            best = ma
            argmax = b
    return ShiftProfile(
        bin_edges=tuple(float(e) for e in bins.edges()),
        counts=tuple(int(c) for c in counts),
        mean_signed_shift=tuple(mean_signed),
        mean_abs_shift=tuple(mean_abs),
        argmax_abs_bin=argmax,
        overall_mean_signed=float(diff.mean()),
        key=key,
        n=len(pairs.samples),
    )


def shift_grid(
    cells: dict[tuple[str, str], PairedDataset],
    bins: Optional[BinSpec] = None,
    key: str = PREDICTION_CONFIDENCE,
    conf_mode: str = SOFTMAX,
) -> dict[tuple[str, str], ShiftProfile]:
    """One profile per (model, dataset) cell, in sorted key order."""
    return {
        cell: shift_profile(cells[cell], bins, key, conf_mode)
        for cell in sorted(cells)
    }


def profile_csv(profile: ShiftProfile) -> str:
    lines = ["bin_lo,bin_hi,count,mean_signed,mean_abs"]
    for row in profile.rows():
        ms = "" if row["mean_signed"] is None else repr(row["mean_signed"])
        ma = "" if row["mean_abs"] is None else repr(row["mean_abs"])
        lines.append(
            f"{row['bin_lo']!r},{row['bin_hi']!r},{row['count']},{ms},{ma}"
        )
    return "\n".join(lines) + "\n"
