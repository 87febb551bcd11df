"""Candidate scoring: per-token and per-sequence log-likelihoods.

For each multiple-choice sample the model scores every candidate continuation
conditioned on the shared context.  The candidate's sequence log-probability
is the sum of the log-probabilities of its tokens under the model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Sequence

import torch
from torch import nn

from .benchmarks import Sample


@dataclass(frozen=True)
class ScoredSample:
    sample_id: str
    true_index: int
    candidate_logprobs: tuple  # one float per candidate
    candidate_token_logprobs: tuple  # tuple of tuples of per-token floats


def _encode(tokenizer, text: str) -> List[int]:
    ids = tokenizer.encode(text)
    # HF tokenizers may return lists already; BatchEncoding handled via encode.
    return list(ids)


@torch.no_grad()
def score_candidates(
    model: nn.Module, tokenizer, sample: Sample, device: str = "cpu"
) -> ScoredSample:
    ctx_ids = _encode(tokenizer, sample.context)
    seq_lps: List[float] = []
    tok_lps: List[tuple] = []
    for cand in sample.candidates:
        cand_ids = _encode(tokenizer, cand)
        if not cand_ids:
            raise ValueError(
                f"{sample.sample_id}: candidate tokenizes to zero tokens"
            )
        ids = ctx_ids + cand_ids
        if len(ids) < 2:
            raise ValueError(f"{sample.sample_id}: sequence too short to score")
        input_ids = torch.tensor([ids], dtype=torch.long, device=device)
        logits = model(input_ids).logits[0].to(torch.float64)
        logprobs = torch.log_softmax(logits, dim=-1)
        # Token at position i is predicted by logits at position i-1.
        start = max(len(ctx_ids), 1)
        per_token = [
            float(logprobs[pos - 1, ids[pos]]) for pos in range(start, len(ids))
        ]
        # Nonpositive by construction; clamp tiny positive fp noise.
        per_token = [min(lp, 0.0) for lp in per_token]
        seq_lps.append(math.fsum(per_token))
        tok_lps.append(tuple(per_token))
    return ScoredSample(
        sample_id=sample.sample_id,
        true_index=sample.true_index,
        candidate_logprobs=tuple(seq_lps),
        candidate_token_logprobs=tuple(tok_lps),
    )


def score_all(
    model: nn.Module, tokenizer, samples: Sequence[Sample], device: str = "cpu"
) -> List[ScoredSample]:
    model.eval()
    return [score_candidates(model, tokenizer, s, device) for s in samples]
