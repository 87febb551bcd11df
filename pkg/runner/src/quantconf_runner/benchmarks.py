"""Benchmark adapters.

Each adapter converts one raw dataset row into a :class:`Sample` holding a
shared context string, the candidate continuations, and the index of the
correct candidate.  Rows can come from a local newline-delimited JSON file
(``load_local``) or, when network access permits, from the ``datasets``
library (``load_hub``).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, Iterable, List, Optional


@dataclass(frozen=True)
class Sample:
    sample_id: str
    context: str
    candidates: tuple
    true_index: int

    def validate(self) -> None:
        if len(self.candidates) < 2:
            raise ValueError(f"{self.sample_id}: need >= 2 candidates")
        if not 0 <= self.true_index < len(self.candidates):
            raise ValueError(f"{self.sample_id}: true_index out of range")


def _letter_index(label: str, choices: List[str]) -> int:
    label = str(label)
    if label in choices:
        return choices.index(label)
    raise ValueError(f"answer label {label!r} not found in choices {choices}")


def adapt_arc_easy(row: Dict) -> Sample:
    choices = row["choices"]
    labels = [str(x) for x in choices["label"]]
    return Sample(
        sample_id=str(row["id"]),
        context=f"Question: {row['question']}\nAnswer:",
        candidates=tuple(f" {t}" for t in choices["text"]),
        true_index=_letter_index(row["answerKey"], labels),
    )


def adapt_boolq(row: Dict) -> Sample:
    return Sample(
        sample_id=str(row.get("id", row["question"][:48])),
        context=f"{row['passage']}\nQuestion: {row['question']}?\nAnswer:",
        candidates=(" no", " yes"),
        true_index=1 if row["answer"] else 0,
    )


def adapt_hellaswag(row: Dict) -> Sample:
    return Sample(
        sample_id=str(row.get("ind", row.get("id", row["ctx"][:48]))),
        context=row["ctx"],
        candidates=tuple(f" {e}" for e in row["endings"]),
        true_index=int(row["label"]),
    )


def adapt_openbookqa(row: Dict) -> Sample:
    choices = row["choices"]
    labels = [str(x) for x in choices["label"]]
    return Sample(
        sample_id=str(row["id"]),
        context=row["question_stem"],
        candidates=tuple(f" {t}" for t in choices["text"]),
        true_index=_letter_index(row["answerKey"], labels),
    )


def adapt_piqa(row: Dict) -> Sample:
    return Sample(
        sample_id=str(row.get("id", row["goal"][:48])),
        context=f"Question: {row['goal']}\nAnswer:",
        candidates=(f" {row['sol1']}", f" {row['sol2']}"),
        true_index=int(row["label"]),
    )


def adapt_xstory_en(row: Dict) -> Sample:
    context = " ".join(
        row[k] for k in ("input_sentence_1", "input_sentence_2",
                         "input_sentence_3", "input_sentence_4")
    )
    candidates = (f" {row['sentence_quiz1']}", f" {row['sentence_quiz2']}")
    return Sample(
        sample_id=str(row.get("story_id", context[:48])),
        context=context,
        candidates=candidates,
        true_index=int(row["answer_right_ending"]) - 1,
    )


ADAPTERS: Dict[str, Callable[[Dict], Sample]] = {
    "arc_easy": adapt_arc_easy,
    "boolq": adapt_boolq,
    "hellaswag": adapt_hellaswag,
    "openbookqa": adapt_openbookqa,
    "piqa": adapt_piqa,
    "xstory_en": adapt_xstory_en,
}

HUB_SPECS = {
    "arc_easy": ("allenai/ai2_arc", "ARC-Easy", "test"),
    "boolq": ("google/boolq", None, "validation"),
    "hellaswag": ("Rowan/hellaswag", None, "validation"),
    "openbookqa": ("allenai/openbookqa", "main", "test"),
    "piqa": ("ybisk/piqa", None, "validation"),
    "xstory_en": ("juletxara/xstory_cloze", "en", "eval"),
}


def load_local(path: Path, benchmark: str, limit: Optional[int] = None) -> List[Sample]:
    """Load samples from a local newline-delimited JSON file of raw rows."""
    adapt = ADAPTERS[benchmark]
    samples: List[Sample] = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            sample = adapt(json.loads(line))
            sample.validate()
            samples.append(sample)
            if limit is not None and len(samples) >= limit:
                break
    if not samples:
        raise ValueError(f"no samples found in {path}")
    return samples


def load_hub(benchmark: str, limit: Optional[int] = None) -> List[Sample]:
    """Load samples via the ``datasets`` library (requires network access)."""
    from datasets import load_dataset

    name, subset, split = HUB_SPECS[benchmark]
    ds = load_dataset(name, subset, split=split)
    adapt = ADAPTERS[benchmark]
    samples = []
    for row in ds:
        sample = adapt(dict(row))
        sample.validate()
        samples.append(sample)
        if limit is not None and len(samples) >= limit:
            break
    return samples


def load_samples(benchmark: str, dataset_path: Optional[Path],
                 limit: Optional[int] = None) -> List[Sample]:
    if dataset_path is not None:
        return load_local(dataset_path, benchmark, limit)
    return load_hub(benchmark, limit)
