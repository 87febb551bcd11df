"""End-to-end: score a local checkpoint, export records, and verify that the
analysis toolkit accepts them through its own CLI (`quantconf validate` and
`quantconf compare`)."""

import json
import math
import subprocess
import sys

import pytest

from quantconf_runner.config import QuantSettings, RunnerConfig
from quantconf_runner.export import write_manifest
from quantconf_runner.run import run_export


def _cfg(model_dir, data_path, out_path, quantized=False, method="rtn"):
    return RunnerConfig(
        model=str(model_dir),
        benchmark="hellaswag",
        dataset_path=data_path,
        output_path=out_path,
        quantized=quantized,
        quant=QuantSettings(num_bits=4, group_size=16, method=method),
        tokenizer="byte",
        device="cpu",
        seed=0,
    )


@pytest.fixture(scope="module")
def exported_runs(tiny_model_dir, hellaswag_jsonl, tmp_path_factory):
    out = tmp_path_factory.mktemp("runs")
    full = run_export(_cfg(tiny_model_dir, hellaswag_jsonl, out / "full.jsonl"))
    quant = run_export(
        _cfg(tiny_model_dir, hellaswag_jsonl, out / "quantized.jsonl", quantized=True)
    )
    manifest = write_manifest(full, quant, "hellaswag", 4, out / "manifest.json")
    return full, quant, manifest


def _read_records(path):
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


def _quantconf(*args):
    return subprocess.run(
        [sys.executable, "-m", "quantconf.cli", *args],
        capture_output=True, text=True,
    )


def test_record_schema_and_alignment(exported_runs):
    full, quant, _ = exported_runs
    full_recs, quant_recs = _read_records(full), _read_records(quant)
    assert len(full_recs) == len(quant_recs) == 50
    for fr, qr in zip(full_recs, quant_recs):
        assert fr["sample_id"] == qr["sample_id"]
        assert fr["true_index"] == qr["true_index"]
        assert fr["dataset_id"] == qr["dataset_id"] == "hellaswag"
        assert len(fr["candidate_logprobs"]) == 4
        for lp, toks in zip(fr["candidate_logprobs"],
                            fr["candidate_token_logprobs"]):
            assert lp <= 0
            assert abs(math.fsum(toks) - lp) <= 1e-9
    assert full_recs[0]["model_id"].endswith("-full")
    assert quant_recs[0]["model_id"].endswith("-4bit-rtn")


def test_quantization_changes_scores(exported_runs):
    full, quant, _ = exported_runs
    full_recs, quant_recs = _read_records(full), _read_records(quant)
    diffs = [
        abs(a - b)
        for fr, qr in zip(full_recs, quant_recs)
        for a, b in zip(fr["candidate_logprobs"], qr["candidate_logprobs"])
    ]
    assert max(diffs) > 0


def test_validate_cli_accepts_exports(exported_runs):
    full, quant, _ = exported_runs
    for path in (full, quant):
        proc = _quantconf("validate", str(path))
        assert proc.returncode == 0, proc.stderr


def test_compare_cli_runs_on_exports(exported_runs):
    _, _, manifest = exported_runs
    proc = _quantconf("compare", "--manifest", str(manifest), "--format", "json")
    assert proc.returncode == 0, proc.stderr
    report = json.loads(proc.stdout)
    assert report["dataset_id"] == "hellaswag"
    assert report["n"] == 50
    assert 0.0 <= report["full"]["accuracy"] <= 1.0
    assert report["jsd"]["jsd_halved"] >= 0.0


def test_repeat_run_is_deterministic(tiny_model_dir, hellaswag_jsonl, tmp_path,
                                     exported_runs):
    full, _, _ = exported_runs
    again = run_export(_cfg(tiny_model_dir, hellaswag_jsonl, tmp_path / "again.jsonl"))
    a, b = _read_records(full), _read_records(again)
    for ra, rb in zip(a, b):
        for x, y in zip(ra["candidate_logprobs"], rb["candidate_logprobs"]):
            assert abs(x - y) <= 1e-5


def test_compensated_quantized_export(tiny_model_dir, hellaswag_jsonl, tmp_path):
    path = run_export(
        _cfg(tiny_model_dir, hellaswag_jsonl, tmp_path / "comp.jsonl",
             quantized=True, method="compensated")
    )
    recs = _read_records(path)
    assert len(recs) == 50
    assert recs[0]["model_id"].endswith("-4bit-compensated")
    proc = _quantconf("validate", str(path))
    assert proc.returncode == 0, proc.stderr
