"""Jensen-Shannon divergence/distance between full and quantized true-class
probability vectors."""

from __future__ import annotations

import math
from typing import Iterable

import numpy as np

HALVED = "halved"
PAPER_EXPANDED = "paper_expanded"

# Floor applied before L1 normalization, purely to avoid log(0) from
# underflow; clamping events are counted and surfaced by jsd_report.
_CLAMP_FLOOR = 1e-300


def kl(p, q) -> float:
    """Kullback-Leibler divergence sum p_i ln(p_i/q_i), 0 ln(0/x) := 0.

    Requires normalized inputs and supp(p) subset of supp(q).
    """
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if p.shape != q.shape:
        raise ValueError("length mismatch")
    if abs(p.sum() - 1.0) > 1e-9 or abs(q.sum() - 1.0) > 1e-9:
        raise ValueError("inputs must each sum to 1 within 1e-9")
    if np.any((q == 0.0) & (p > 0.0)):
        raise ValueError("support violation: q_i = 0 where p_i > 0")
    mask = p > 0.0
    return float(np.sum(p[mask] * np.log(p[mask] / q[mask])))


def _clamp_and_normalize(v: np.ndarray) -> tuple[np.ndarray, int]:
    clamped = np.clip(v, _CLAMP_FLOOR, 1.0)
    n_clamped = int(np.sum(clamped != v))
    return clamped / clamped.sum(), n_clamped


def jsd(p, q, variant: str = HALVED) -> float:
    """Jensen-Shannon divergence between two nonnegative vectors.

    Inputs are L1-normalized first. The halved variant is the standard
    (1/2)(KL(p||m) + KL(q||m)) with m the mixture, bounded by ln 2; the
    paper_expanded variant omits the 1/2 and equals exactly twice the halved
    value. JS distance is sqrt of the halved variant.
    """
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if p.shape != q.shape:
        raise ValueError("length mismatch")
    pn, _ = _clamp_and_normalize(p)
    qn, _ = _clamp_and_normalize(q)
    m = 0.5 * (pn + qn)
    half = 0.5 * (kl(pn, m) + kl(qn, m))
    half = max(half, 0.0)  # guard tiny negative rounding
    if variant == HALVED:
        return half
    if variant == PAPER_EXPANDED:
        return 2.0 * half
    raise ValueError(f"unknown jsd variant: {variant!r}")


def js_distance(p, q) -> float:
    return math.sqrt(jsd(p, q, HALVED))


def jsd_per_instance(p, q) -> float:
    """Mean over instances of the binary JSD between (p_i, 1-p_i) and
    (q_i, 1-q_i); a documented alternative to vector-level normalization."""
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if p.shape != q.shape:
        raise ValueError("length mismatch")
    vals = [jsd([pi, 1.0 - pi], [qi, 1.0 - qi]) for pi, qi in zip(p, q)]
    return float(np.mean(vals))


def jsd_report(p, q) -> dict:
    """Both variants plus the distance and the clamp count, for reports."""
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    _, cp = _clamp_and_normalize(p)
    _, cq = _clamp_and_normalize(q)
    half = jsd(p, q, HALVED)
    return {
        "jsd_halved": half,
        "jsd_paper_expanded": 2.0 * half,
        "js_distance": math.sqrt(half),
        "clamped_entries": cp + cq,
    }


def mean_jsd_by_model(
    entries: Iterable[tuple[str, str, np.ndarray, np.ndarray]],
) -> list[dict]:
    """entries: (model_id, dataset_id, full_true_class_vec, quant_true_class_vec).

    Returns one row per model with the unweighted mean across datasets of the
    per-dataset JSD (halved and expanded) and JS distance, sorted by model_id.
    """
    per_model: dict[str, list[dict]] = {}
    for model_id, dataset_id, p, q in entries:
        rep = jsd_report(p, q)
        rep["dataset_id"] = dataset_id
        per_model.setdefault(model_id, []).append(rep)
    rows = []
    for model_id in sorted(per_model):
        reps = per_model[model_id]
        rows.append(
            {
                "model_id": model_id,
                "num_datasets": len(reps),
                "mean_jsd_halved": float(np.mean([r["jsd_halved"] for r in reps])),
                "mean_jsd_paper_expanded": float(
                    np.mean([r["jsd_paper_expanded"] for r in reps])
                ),
                "mean_js_distance": float(np.mean([r["js_distance"] for r in reps])),
            }
        )
    return rows
