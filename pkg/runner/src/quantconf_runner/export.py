"""Export scored runs in the analysis toolkit's record wire format.

Each line is a UTF-8 JSON object with ``dataset_id``, ``sample_id``,
``model_id``, ``true_index``, ``candidate_logprobs``, and
``candidate_token_logprobs`` (per-token values summing to the candidate
total).  ``write_manifest`` produces the comparison manifest consumed by
``quantconf compare``.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Optional, Sequence

from .scoring import ScoredSample


def export_run(
    scored: Sequence[ScoredSample],
    dataset_id: str,
    model_id: str,
    out_path: Path,
) -> Path:
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
        for s in scored:
            rec = {
                "dataset_id": dataset_id,
                "sample_id": s.sample_id,
                "model_id": model_id,
                "true_index": s.true_index,
                "candidate_logprobs": list(s.candidate_logprobs),
                "candidate_token_logprobs": [
                    list(toks) for toks in s.candidate_token_logprobs
                ],
            }
            fh.write(json.dumps(rec) + "\n")
    return out_path


def write_manifest(
    full_run_path: Path,
    quantized_run_path: Path,
    dataset_id: str,
    num_classes_hint: int,
    out_path: Path,
    task_kind: Optional[str] = None,
) -> Path:
    if task_kind is None:
        task_kind = "binary" if num_classes_hint == 2 else "multiclass"
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    manifest = {
        "full_run_path": str(Path(full_run_path).resolve()),
        "quantized_run_path": str(Path(quantized_run_path).resolve()),
        "dataset_id": dataset_id,
        "task_kind": task_kind,
        "num_classes_hint": num_classes_hint,
    }
    with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")
    return out_path
