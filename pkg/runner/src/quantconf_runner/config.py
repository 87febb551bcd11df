"""Runner configuration."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

BENCHMARKS = ("arc_easy", "boolq", "hellaswag", "openbookqa", "piqa", "xstory_en")


@dataclass(frozen=True)
class QuantSettings:
    """Mirrors the analysis toolkit's quantizer defaults."""

    num_bits: int = 4
    group_size: int = 128
    damp_percent: float = 0.01
    symmetric: bool = True
    true_sequential: bool = True
    method: str = "rtn"  # "rtn" | "compensated"

    def validate(self) -> None:
        if not 2 <= self.num_bits <= 8:
            raise ValueError("num_bits must lie in [2, 8]")
        if self.group_size < 1:
            raise ValueError("group_size must be >= 1")
        if self.method not in ("rtn", "compensated"):
            raise ValueError(f"unknown method: {self.method!r}")

    @property
    def tag(self) -> str:
        return f"{self.num_bits}bit-{self.method}"


@dataclass(frozen=True)
class RunnerConfig:
    model: str  # HF model name or local directory
    benchmark: str
    output_path: Path
    revision: Optional[str] = None
    quantized: bool = False
    quant: QuantSettings = field(default_factory=QuantSettings)
    dataset_path: Optional[Path] = None  # local JSONL; otherwise fetched
    calib_path: Optional[Path] = None  # local calibration text JSONL
    limit: Optional[int] = None
    batch_size: int = 8
    device: str = "cpu"
    tokenizer: str = "auto"  # "auto" | "byte"
    seed: int = 0

    def validate(self) -> None:
        if self.benchmark not in BENCHMARKS:
            raise ValueError(
                f"unknown benchmark {self.benchmark!r}; expected one of {BENCHMARKS}"
            )
        if self.quantized:
            self.quant.validate()
