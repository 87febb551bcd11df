"""Tokenizers for the runner.

``ByteTokenizer`` maps UTF-8 bytes directly to token ids, which pairs with
small locally-constructed language models whose vocabulary covers byte
values.  For published checkpoints the Hugging Face ``AutoTokenizer`` is used
instead (see :func:`load_tokenizer`).
"""

from __future__ import annotations

from typing import List, Sequence


class ByteTokenizer:
    """UTF-8 byte-level tokenizer: token id == byte value (0..255)."""

    vocab_size = 256

    def encode(self, text: str) -> List[int]:
        return list(text.encode("utf-8"))

    def decode(self, ids: Sequence[int]) -> str:
        return bytes(int(i) for i in ids).decode("utf-8", errors="replace")


def load_tokenizer(name: str, model: str, revision=None):
    """Return a tokenizer per the config ``tokenizer`` setting.

    ``byte`` gives a :class:`ByteTokenizer`; ``auto`` loads the model's own
    tokenizer via ``transformers``.
    """
    if name == "byte":
        return ByteTokenizer()
    if name == "auto":
        from transformers import AutoTokenizer

        return AutoTokenizer.from_pretrained(model, revision=revision)
    raise ValueError(f"unknown tokenizer setting: {name!r}")
