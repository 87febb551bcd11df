"""Prediction-record data model, newline-delimited JSON wire format, and
full/quantized run pairing."""

from __future__ import annotations

import io
import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional

log = logging.getLogger("quantconf")

_RECORD_FIELDS = (
    "dataset_id",
    "sample_id",
    "model_id",
    "true_index",
    "candidate_logprobs",
    "candidate_token_logprobs",
)

_TOKEN_SUM_TOL = 1e-9


class RecordError(ValueError):
    """Malformed or invariant-violating record data."""


class PairingError(ValueError):
    """Full and quantized runs cannot be aligned."""


@dataclass(frozen=True)
class PredictionRecord:
    """One sample's candidate-answer log-probabilities for one model run."""

    dataset_id: str
    sample_id: str
    model_id: str
    true_index: int
    candidate_logprobs: tuple[float, ...]
    candidate_token_logprobs: Optional[tuple[tuple[float, ...], ...]] = None

    @property
    def num_candidates(self) -> int:
        return len(self.candidate_logprobs)

    def validate(self) -> None:
        k = len(self.candidate_logprobs)
        if k < 2:
            raise RecordError(
                f"candidate_logprobs needs at least 2 entries, got {k} "
                f"(sample_id={self.sample_id})"
            )
        if not isinstance(self.true_index, int) or self.true_index < 0:
            raise RecordError(
                f"true_index must be a non-negative integer "
                f"(sample_id={self.sample_id})"
            )
        if self.true_index >= k:
            raise RecordError(
                f"true_index out of range: {self.true_index} >= {k} "
                f"(sample_id={self.sample_id})"
            )
        for lp in self.candidate_logprobs:
            if not math.isfinite(lp) or lp > 0.0:
                raise RecordError(
                    f"candidate_logprobs entries must be finite and <= 0, "
                    f"got {lp!r} (sample_id={self.sample_id})"
                )
        if self.candidate_token_logprobs is not None:
            if len(self.candidate_token_logprobs) != k:
                raise RecordError(
                    f"candidate_token_logprobs length mismatch "
                    f"(sample_id={self.sample_id})"
                )
            for idx, toks in enumerate(self.candidate_token_logprobs):
                if not toks:
                    raise RecordError(
                        f"empty token list for candidate {idx} "
                        f"(sample_id={self.sample_id})"
                    )
                total = math.fsum(toks)
                if abs(total - self.candidate_logprobs[idx]) > _TOKEN_SUM_TOL:
                    raise RecordError(
                        f"token logprobs for candidate {idx} sum to {total}, "
                        f"expected {self.candidate_logprobs[idx]} "
                        f"(sample_id={self.sample_id})"
                    )

    def to_dict(self) -> dict:
        d = {
            "dataset_id": self.dataset_id,
            "sample_id": self.sample_id,
            "model_id": self.model_id,
            "true_index": self.true_index,
            "candidate_logprobs": list(self.candidate_logprobs),
        }
        if self.candidate_token_logprobs is not None:
            d["candidate_token_logprobs"] = [
                list(t) for t in self.candidate_token_logprobs
            ]
        return d


@dataclass(frozen=True)
class RunManifest:
    """Points at one full/quantized record-file pair."""

    full_run_path: Path
    quantized_run_path: Path
    dataset_id: str
    task_kind: str  # "binary" | "multiclass"
    num_classes_hint: Optional[int] = None

    def validate(self) -> None:
        if self.task_kind not in ("binary", "multiclass"):
            raise RecordError(f"unknown task_kind: {self.task_kind!r}")
        if Path(self.full_run_path) == Path(self.quantized_run_path):
            raise RecordError("full and quantized run paths must differ")


@dataclass(frozen=True)
class PairedDataset:
    """Aligned (sample_id, full_record, quantized_record) triples, sorted by
    sample_id."""

    dataset_id: str
    samples: tuple[tuple[str, PredictionRecord, PredictionRecord], ...]
    unmatched_full: int = 0
    unmatched_quantized: int = 0

    def __len__(self) -> int:
        return len(self.samples)

    def swapped(self) -> "PairedDataset":
        """Exchange the full and quantized roles."""
        return PairedDataset(
            dataset_id=self.dataset_id,
            samples=tuple((sid, q, f) for sid, f, q in self.samples),
            unmatched_full=self.unmatched_quantized,
            unmatched_quantized=self.unmatched_full,
        )


def _record_from_obj(obj: dict, lineno: int) -> PredictionRecord:
    unknown = set(obj) - set(_RECORD_FIELDS)
    if unknown:
        log.warning("line %d: ignoring unknown fields %s", lineno, sorted(unknown))
    try:
        dataset_id = obj["dataset_id"]
        sample_id = obj["sample_id"]
        model_id = obj["model_id"]
        true_index = obj["true_index"]
        logprobs = obj["candidate_logprobs"]
    except KeyError as exc:
        raise RecordError(f"line {lineno}: missing field {exc.args[0]!r}") from None
    tok = obj.get("candidate_token_logprobs")
    record = PredictionRecord(
        dataset_id=str(dataset_id),
        sample_id=str(sample_id),
        model_id=str(model_id),
        true_index=true_index,
        candidate_logprobs=tuple(float(x) for x in logprobs),
        candidate_token_logprobs=(
            tuple(tuple(float(x) for x in t) for t in tok) if tok is not None else None
        ),
    )
    try:
        record.validate()
    except RecordError as exc:
        raise RecordError(f"line {lineno}: {exc}") from None
    return record


def parse_records(stream) -> list[PredictionRecord]:
    """Parse newline-delimited JSON records from a text/byte stream or an
    iterable of lines. Blank lines are skipped."""
    if isinstance(stream, (bytes, bytearray)):
        stream = io.StringIO(stream.decode("utf-8"))
    elif isinstance(stream, str):
        stream = io.StringIO(stream)
    elif hasattr(stream, "read") and "b" in getattr(stream, "mode", ""):
        stream = io.TextIOWrapper(stream, encoding="utf-8")
    records = []
    for lineno, raw in enumerate(stream, start=1):
        if isinstance(raw, (bytes, bytearray)):
            raw = raw.decode("utf-8")
        line = raw.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise RecordError(f"line {lineno}: malformed JSON ({exc.msg})") from None
        if not isinstance(obj, dict):
            raise RecordError(f"line {lineno}: expected a JSON object")
        records.append(_record_from_obj(obj, lineno))
    return records


def parse_records_file(path) -> list[PredictionRecord]:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_records(fh)


def serialize_records(records: Iterable[PredictionRecord]) -> str:
    """Inverse of parse_records: one compact JSON object per line."""
    lines = [json.dumps(r.to_dict(), separators=(", ", ": ")) for r in records]
    return "".join(line + "\n" for line in lines)


def write_records(records: Iterable[PredictionRecord], path) -> None:
    Path(path).write_text(serialize_records(records), encoding="utf-8")


def load_manifest(path) -> RunManifest:
    obj = json.loads(Path(path).read_text(encoding="utf-8"))
    known = {"full_run_path", "quantized_run_path", "dataset_id", "task_kind",
             "num_classes_hint"}
    unknown = set(obj) - known
    if unknown:
        log.warning("manifest: ignoring unknown fields %s", sorted(unknown))
    base = Path(path).parent
    manifest = RunManifest(
        full_run_path=base / obj["full_run_path"],
        quantized_run_path=base / obj["quantized_run_path"],
        dataset_id=str(obj["dataset_id"]),
        task_kind=str(obj["task_kind"]),
        num_classes_hint=obj.get("num_classes_hint"),
    )
    manifest.validate()
    return manifest


def pair_runs(
    full: list[PredictionRecord],
    quant: list[PredictionRecord],
    strict: bool = False,
) -> PairedDataset:
    """Align two runs on sample_id (intersection, sorted lexicographically).

    Non-intersecting ids are dropped with a logged count; strict=True turns
    any unmatched id into an error.
    """
    if not full or not quant:
        raise PairingError("both record lists must be non-empty")
    by_id_full = {}
    for r in full:
        if r.sample_id in by_id_full:
            raise PairingError(f"duplicate sample_id in full run: {r.sample_id}")
        by_id_full[r.sample_id] = r
    by_id_quant = {}
    for r in quant:
        if r.sample_id in by_id_quant:
            raise PairingError(f"duplicate sample_id in quantized run: {r.sample_id}")
        by_id_quant[r.sample_id] = r
    shared = sorted(set(by_id_full) & set(by_id_quant))
    if not shared:
        raise PairingError("no overlapping sample_ids between runs")
    unmatched_full = len(by_id_full) - len(shared)
    unmatched_quant = len(by_id_quant) - len(shared)
    if (unmatched_full or unmatched_quant) and strict:
        raise PairingError(
            f"unmatched sample_ids: {unmatched_full} full-only, "
            f"{unmatched_quant} quantized-only (strict mode)"
        )
    if unmatched_full or unmatched_quant:
        log.info(
            "dropped unmatched sample_ids: %d full-only, %d quantized-only",
            unmatched_full,
            unmatched_quant,
        )
    samples = []
    for sid in shared:
        f, q = by_id_full[sid], by_id_quant[sid]
        if f.true_index != q.true_index:
            raise PairingError(f"label mismatch: {sid}")
        if f.num_candidates != q.num_candidates:
            raise PairingError(f"candidate count mismatch: {sid}")
        samples.append((sid, f, q))
    return PairedDataset(
        dataset_id=full[0].dataset_id,
        samples=tuple(samples),
        unmatched_full=unmatched_full,
        unmatched_quantized=unmatched_quant,
    )
