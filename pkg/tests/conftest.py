import math

import numpy as np
import pytest

from quantconf.records import PairedDataset, PredictionRecord


def make_record(
    logprobs,
    sample_id="s0",
    true_index=0,
    dataset_id="toy",
    model_id="m",
    token_logprobs=None,
):
    return PredictionRecord(
        dataset_id=dataset_id,
        sample_id=sample_id,
        model_id=model_id,
        true_index=true_index,
        candidate_logprobs=tuple(float(x) for x in logprobs),
        candidate_token_logprobs=(
            tuple(tuple(float(x) for x in t) for t in token_logprobs)
            if token_logprobs is not None
            else None
        ),
    )


def random_paired_dataset(rng, n=50, k=4, dataset_id="toy"):
    """Paired runs with independent random candidate log-probs."""
    samples = []
    for i in range(n):
        true = int(rng.integers(k))
        lp_f = np.log(rng.dirichlet(np.ones(k)))
        lp_q = np.log(rng.dirichlet(np.ones(k)))
        sid = f"s{i:05d}"
        samples.append(
            (
                sid,
                make_record(lp_f, sid, true, dataset_id, "full"),
                make_record(lp_q, sid, true, dataset_id, "quant"),
            )
        )
    return PairedDataset(dataset_id=dataset_id, samples=tuple(samples))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
