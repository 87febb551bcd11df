import json
import random
from pathlib import Path

import pytest
import torch
from transformers import GPT2Config, GPT2LMHeadModel

WORDS = (
    "cat dog run jump tree house river stone light dark fast slow "
    "open close start finish near far"
).split()


def _sentence(rng: random.Random, n: int) -> str:
    return " ".join(rng.choice(WORDS) for _ in range(n))


@pytest.fixture(scope="session")
def tiny_model_dir(tmp_path_factory) -> Path:
    """A small byte-vocabulary GPT2 checkpoint saved to disk."""
    torch.manual_seed(1234)
    config = GPT2Config(
        vocab_size=256, n_positions=512, n_embd=32, n_layer=2, n_head=2,
        bos_token_id=0, eos_token_id=0,
    )
    model = GPT2LMHeadModel(config)
    out = tmp_path_factory.mktemp("tiny-model") / "tiny-gpt2-bytes"
    model.save_pretrained(out)
    return out


@pytest.fixture(scope="session")
def hellaswag_jsonl(tmp_path_factory) -> Path:
    """50 synthetic rows in the hellaswag raw-row format."""
    rng = random.Random(99)
    path = tmp_path_factory.mktemp("data") / "hellaswag_local.jsonl"
    with open(path, "w", encoding="utf-8") as fh:
        for i in range(50):
            row = {
                "ind": i,
                "ctx": _sentence(rng, 6) + ".",
                "endings": [_sentence(rng, 4) for _ in range(4)],
                "label": rng.randrange(4),
            }
            fh.write(json.dumps(row) + "\n")
    return path
