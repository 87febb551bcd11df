"""Candidate log-probabilities -> predictive distributions and correctness."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .records import PredictionRecord

SOFTMAX = "softmax_over_candidates"
RAW = "raw"


@dataclass(frozen=True)
class PredictiveDistribution:
    """Per-sample answer distribution derived from sequence log-probs.

    In raw mode probs are unnormalized exp(logprob) and ``normalized`` is
    False; the sum-to-one invariant is waived.
    """

    probs: tuple[float, ...]
    predicted_index: int
    confidence: float
    conf_true: float
    raw_seq_probs: tuple[float, ...]
    normalized: bool = True

    @property
    def num_candidates(self) -> int:
        return len(self.probs)


def sequence_logprob(token_logprobs) -> float:
    """Log of the product of per-token probabilities: the sum of the list."""
    toks = list(token_logprobs)
    if not toks:
        raise ValueError("token_logprobs must be non-empty")
    for lp in toks:
        if not math.isfinite(lp):
            raise ValueError(f"non-finite token logprob: {lp!r}")
        if lp > 0.0:
            raise ValueError(f"positive token logprob: {lp!r}")
    return math.fsum(toks)


def normalize(
    record: PredictionRecord,
    mode: str = SOFTMAX,
    length_normalize: bool = False,
) -> PredictiveDistribution:
    """Turn a record's candidate log-probs into a PredictiveDistribution.

    length_normalize divides each sequence log-prob by its token count
    (needs candidate_token_logprobs); off by default.
    """
    lp = np.asarray(record.candidate_logprobs, dtype=np.float64)
    if length_normalize:
        if record.candidate_token_logprobs is None:
            raise ValueError("length_normalize requires candidate_token_logprobs")
        lengths = np.array(
            [len(t) for t in record.candidate_token_logprobs], dtype=np.float64
        )
        lp = lp / lengths
    raw = np.exp(lp)
    if mode == SOFTMAX:
        shifted = lp - lp.max()
        ex = np.exp(shifted)
        probs = ex / ex.sum()
        normalized = True
    elif mode == RAW:
        probs = raw
        normalized = False
    else:
        raise ValueError(f"unknown normalization mode: {mode!r}")
    predicted = int(np.argmax(probs))  # argmax takes the lowest index on ties
    return PredictiveDistribution(
        probs=tuple(float(p) for p in probs),
        predicted_index=predicted,
        confidence=float(probs[predicted]),
        conf_true=float(probs[record.true_index]),
        raw_seq_probs=tuple(float(p) for p in raw),
        normalized=normalized,
    )


def is_correct(dist: PredictiveDistribution, true_index: int) -> bool:
    if true_index >= dist.num_candidates:
        raise ValueError("true_index out of range")
    return dist.predicted_index == true_index
