"""Accuracy, ECE/ACE, confidence statistics, and predictive entropy for a
single run."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .scoring import PredictiveDistribution

EQUAL_WIDTH = "equal_width"
EQUAL_MASS = "equal_mass"

DEFAULT_NUM_BINS = 10


@dataclass(frozen=True)
class BinSpec:
    strategy: str = EQUAL_WIDTH
    num_bins: int = DEFAULT_NUM_BINS
    range_start: float = 0.0

    def validate(self) -> None:
        if self.strategy not in (EQUAL_WIDTH, EQUAL_MASS):
            raise ValueError(f"unknown binning strategy: {self.strategy!r}")
        if self.num_bins < 1:
            raise ValueError("num_bins must be >= 1")
        if not 0.0 <= self.range_start < 1.0:
            raise ValueError("range_start must lie in [0, 1)")

    def edges(self) -> np.ndarray:
        """Equal-width edges over [range_start, 1]."""
        return np.linspace(self.range_start, 1.0, self.num_bins + 1)


@dataclass(frozen=True)
class RunMetrics:
    """Per-run metric bundle. All probability metrics are fractions in [0,1];
    entropy is in nats. Percent scaling happens only at render time."""

    accuracy: float
    ce: float
    ce_kind: str  # "ece" | "ace"
    conf_mean: float
    conf_err: Optional[float]  # absent when the run has no errors
    conf_true: float
    entropy_mean: float
    n: int


def assign_equal_width_bins(values: np.ndarray, spec: BinSpec) -> np.ndarray:
    """Bin index per value. Bins are right-closed, the first bin is also
    closed below; values below range_start fall into the first bin."""
    edges = spec.edges()
    idx = np.searchsorted(edges, values, side="left") - 1
    return np.clip(idx, 0, spec.num_bins - 1)


def _confidences_and_correct(
    dists: Sequence[PredictiveDistribution], labels: Sequence[int]
) -> tuple[np.ndarray, np.ndarray]:
    if len(dists) != len(labels):
        raise ValueError("dists and labels length mismatch")
    if not dists:
        raise ValueError("empty run")
    conf = np.array([d.confidence for d in dists])
    correct = np.array(
        [d.predicted_index == t for d, t in zip(dists, labels)], dtype=np.float64
    )
    return conf, correct


def ece(
    dists: Sequence[PredictiveDistribution],
    labels: Sequence[int],
    bins: BinSpec = BinSpec(),
) -> float:
    """Expected calibration error over equal-width confidence bins:
    sum_m (|B_m|/n) * |acc(B_m) - mean_conf(B_m)|. Empty bins contribute 0."""
    bins.validate()
    if bins.strategy != EQUAL_WIDTH:
        raise ValueError("ece requires equal_width binning")
    conf, correct = _confidences_and_correct(dists, labels)
    n = len(conf)
    idx = assign_equal_width_bins(conf, bins)
    counts = np.bincount(idx, minlength=bins.num_bins)
    conf_sum = np.bincount(idx, weights=conf, minlength=bins.num_bins)
    acc_sum = np.bincount(idx, weights=correct, minlength=bins.num_bins)
    nonempty = counts > 0
    gaps = np.abs(acc_sum[nonempty] - conf_sum[nonempty]) / counts[nonempty]
    return float(np.sum(counts[nonempty] / n * gaps))


def reliability_bins(
    dists: Sequence[PredictiveDistribution],
    labels: Sequence[int],
    bins: BinSpec = BinSpec(),
) -> list[dict]:
    """Per-bin (lo, hi, count, mean confidence, accuracy) for reliability
    diagrams. Empty bins carry None means."""
    bins.validate()
    conf, correct = _confidences_and_correct(dists, labels)
    idx = assign_equal_width_bins(conf, bins)
    edges = bins.edges()
    out = []
    for m in range(bins.num_bins):
        mask = idx == m
        count = int(mask.sum())
        out.append(
            {
                "bin_lo": float(edges[m]),
                "bin_hi": float(edges[m + 1]),
                "count": count,
                "mean_conf": float(conf[mask].mean()) if count else None,
                "accuracy": float(correct[mask].mean()) if count else None,
            }
        )
    return out


def equal_mass_bin_sizes(n: int, m: int) -> list[int]:
    """Contiguous bin sizes: floor(n/m) each, remainder added one-per-bin
    starting from the last (highest-confidence) bin backward."""
    base, rem = divmod(n, m)
    sizes = [base] * m
    for i in range(rem):
        sizes[m - 1 - i] += 1
    return sizes


def ace(
    dists: Sequence[PredictiveDistribution],
    labels: Sequence[int],
    bins: BinSpec = BinSpec(strategy=EQUAL_MASS),
) -> float:
    """Adaptive calibration error: per-class equal-mass bins over the sorted
    class probabilities, (1/(C*M)) * sum_c sum_m |acc(B_mc) - mean_conf(B_mc)|."""
    bins.validate()
    if bins.strategy != EQUAL_MASS:
        raise ValueError("ace requires equal_mass binning")
    if len(dists) != len(labels):
        raise ValueError("dists and labels length mismatch")
    if not dists:
        raise ValueError("empty run")
    n = len(dists)
    if n < bins.num_bins:
        raise ValueError("more bins than samples")
    num_classes = dists[0].num_candidates
    for d in dists:
        if d.num_candidates != num_classes:
            raise ValueError("ragged candidate counts across records")
    probs = np.array([d.probs for d in dists])  # (n, C)
    y = np.asarray(labels)
    sizes = equal_mass_bin_sizes(n, bins.num_bins)
    total = 0.0
    for c in range(num_classes):
        order = np.argsort(probs[:, c], kind="stable")
        p_sorted = probs[order, c]
        hit_sorted = (y[order] == c).astype(np.float64)
        start = 0
        for size in sizes:
            if size == 0:
                continue
            sl = slice(start, start + size)
            total += abs(hit_sorted[sl].mean() - p_sorted[sl].mean())
            start += size
    return total / (num_classes * bins.num_bins)


def predictive_entropy(dist: PredictiveDistribution) -> float:
    """Shannon entropy of the answer distribution, in nats (0 ln 0 := 0)."""
    return entropy_of(np.asarray(dist.probs))


def entropy_of(probs: np.ndarray) -> float:
    p = np.asarray(probs, dtype=np.float64)
    nz = p > 0.0
    return float(-np.sum(p[nz] * np.log(p[nz])))


def confidence_stats(
    dists: Sequence[PredictiveDistribution], labels: Sequence[int]
) -> dict:
    """conf_mean, conf_err (None when the run has no errors), conf_true,
    accuracy, mean entropy, and n for one run."""
    conf, correct = _confidences_and_correct(dists, labels)
    wrong = correct == 0.0
    conf_true = np.array([d.conf_true for d in dists])
    entropies = np.array([predictive_entropy(d) for d in dists])
    return {
        "accuracy": float(correct.mean()),
        "conf_mean": float(conf.mean()),
        "conf_err": float(conf[wrong].mean()) if wrong.any() else None,
        "conf_true": float(conf_true.mean()),
        "entropy_mean": float(entropies.mean()),
        "n": len(dists),
    }


def run_metrics(
    dists: Sequence[PredictiveDistribution],
    labels: Sequence[int],
    num_bins: int = DEFAULT_NUM_BINS,
    ce_kind: str = "auto",
) -> RunMetrics:
    """Full metric bundle. ce_kind "auto" picks ECE for binary (K=2) runs and
    ACE otherwise."""
    stats = confidence_stats(dists, labels)
    if ce_kind == "auto":
        ce_kind = "ece" if dists[0].num_candidates == 2 else "ace"
    if ce_kind == "ece":
        ce_value = ece(dists, labels, BinSpec(EQUAL_WIDTH, num_bins))
    elif ce_kind == "ace":
        ce_value = ace(dists, labels, BinSpec(EQUAL_MASS, num_bins))
    else:
        raise ValueError(f"unknown ce_kind: {ce_kind!r}")
    return RunMetrics(
        accuracy=stats["accuracy"],
        ce=ce_value,
        ce_kind=ce_kind,
        conf_mean=stats["conf_mean"],
        conf_err=stats["conf_err"],
        conf_true=stats["conf_true"],
        entropy_mean=stats["entropy_mean"],
        n=stats["n"],
    )
