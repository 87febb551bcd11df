"""Comparison orchestration and report rendering.

Human-readable tables use percent scaling (x100, 2 decimals, entropy x100);
machine formats keep full precision.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .calibration import RunMetrics, run_metrics
from .divergence import jsd_report
from .calibration import BinSpec, EQUAL_WIDTH, predictive_entropy
from .records import PairedDataset, RunManifest, pair_runs, parse_records_file
from .scoring import SOFTMAX, PredictiveDistribution, normalize
from .shifts import PREDICTION_CONFIDENCE, default_range_start, shift_profile
from .stats import PairedTestResult, paired_t_test

STAR = "⋆"

_DELTA_METRICS = ("accuracy", "ce", "conf_mean", "conf_err", "conf_true", "entropy_mean")
_TESTED_METRICS = ("conf_mean", "conf_err", "conf_true", "entropy_mean")


@dataclass(frozen=True)
class CompareOptions:
    num_bins: int = 10
    bin_start: Optional[float] = None  # None -> 1/K for shift bins
    alpha: float = 0.05
    conf_mode: str = SOFTMAX
    jsd_variant: str = "halved"
    ce_kind: str = "auto"
    shift_key: str = PREDICTION_CONFIDENCE
    strict: bool = False


@dataclass(frozen=True)
class ComparisonReport:
    dataset_id: str
    task_kind: str
    n: int
    num_candidates: int
    model_full: str
    model_quantized: str
    options: dict
    full: dict  # RunMetrics as dict
    quantized: dict
    deltas: dict  # quantized - full, per metric (None when undefined)
    tests: dict  # metric -> PairedTestResult dict or None
    significance: dict  # metric -> bool or None
    jsd: dict
    shift: dict

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ComparisonReport":
        return cls(**d)


def _metrics_dict(m: RunMetrics) -> dict:
    return {
        "accuracy": m.accuracy,
        "ce": m.ce,
        "ce_kind": m.ce_kind,
        "conf_mean": m.conf_mean,
        "conf_err": m.conf_err,
        "conf_true": m.conf_true,
        "entropy_mean": m.entropy_mean,
        "n": m.n,
    }


def _deltas(full: dict, quant: dict) -> dict:
    out = {}
    for key in _DELTA_METRICS:
        f, q = full[key], quant[key]
        out[key] = None if f is None or q is None else q - f
    return out


def _test_dict(res: Optional[PairedTestResult]) -> Optional[dict]:
    if res is None:
        return None
    return {
        "n": res.n,
        "mean_diff": res.mean_diff,
        "t_stat": res.t_stat,
        "df": res.df,
        "p_value": res.p_value,
        "significant": res.significant,
        "alpha": res.alpha,
        "degenerate": res.degenerate,
    }


def build_report(
    pairs: PairedDataset,
    task_kind: str,
    options: CompareOptions = CompareOptions(),
    model_full: str = "",
    model_quantized: str = "",
) -> ComparisonReport:
    """Compute every comparison metric on an aligned dataset."""
    dists_f: list[PredictiveDistribution] = []
    dists_q: list[PredictiveDistribution] = []
    labels: list[int] = []
    for _, f, q in pairs.samples:
        dists_f.append(normalize(f, options.conf_mode))
        dists_q.append(normalize(q, options.conf_mode))
        labels.append(f.true_index)
    k = dists_f[0].num_candidates

    ce_kind = options.ce_kind
    if ce_kind == "auto":
        ce_kind = "ece" if task_kind == "binary" or k == 2 else "ace"
    metrics_f = run_metrics(dists_f, labels, options.num_bins, ce_kind)
    metrics_q = run_metrics(dists_q, labels, options.num_bins, ce_kind)

    conf_f = np.array([d.confidence for d in dists_f])
    conf_q = np.array([d.confidence for d in dists_q])
    true_f = np.array([d.conf_true for d in dists_f])
    true_q = np.array([d.conf_true for d in dists_q])
    ent_f = np.array([predictive_entropy(d) for d in dists_f])
    ent_q = np.array([predictive_entropy(d) for d in dists_q])

    def test(a, b):
        if len(a) < 2:
            return None
        return paired_t_test(np.asarray(a), np.asarray(b), options.alpha)

    # quantized-first so mean_diff matches the delta sign convention
    tests: dict[str, Optional[PairedTestResult]] = {
        "conf_mean": test(conf_q, conf_f),
        "conf_true": test(true_q, true_f),
        "entropy_mean": test(ent_q, ent_f),
    }
    # conf_err: samples wrong under BOTH runs
    y = np.asarray(labels)
    pred_f = np.array([d.predicted_index for d in dists_f])
    pred_q = np.array([d.predicted_index for d in dists_q])
    both_wrong = (pred_f != y) & (pred_q != y)
    tests["conf_err"] = (
        test(conf_q[both_wrong], conf_f[both_wrong]) if both_wrong.sum() >= 2 else None
    )

    bin_start = options.bin_start
    if bin_start is None:
        bin_start = default_range_start(k)
    profile = shift_profile(
        pairs,
        BinSpec(EQUAL_WIDTH, options.num_bins, bin_start),
        key=options.shift_key,
        conf_mode=options.conf_mode,
    )

    div = jsd_report(true_f, true_q)

    full_d = _metrics_dict(metrics_f)
    quant_d = _metrics_dict(metrics_q)
    return ComparisonReport(
        dataset_id=pairs.dataset_id,
        task_kind=task_kind,
        n=len(pairs),
        num_candidates=k,
        model_full=model_full,
        model_quantized=model_quantized,
        options={
            "num_bins": options.num_bins,
            "bin_start": bin_start,
            "alpha": options.alpha,
            "conf_mode": options.conf_mode,
            "jsd_variant": options.jsd_variant,
            "ce_kind": ce_kind,
            "shift_key": options.shift_key,
        },
        full=full_d,
        quantized=quant_d,
        deltas=_deltas(full_d, quant_d),
        tests={k_: _test_dict(v) for k_, v in tests.items()},
        significance={
            k_: (None if v is None else v.significant) for k_, v in tests.items()
        },
        jsd=div,
        shift={
            "bin_edges": list(profile.bin_edges),
            "counts": list(profile.counts),
            "mean_signed_shift": list(profile.mean_signed_shift),
            "mean_abs_shift": list(profile.mean_abs_shift),
            "argmax_abs_bin": profile.argmax_abs_bin,
            "overall_mean_signed": profile.overall_mean_signed,
            "key": profile.key,
        },
    )


def run_compare(
    manifest: RunManifest, options: CompareOptions = CompareOptions()
) -> ComparisonReport:
    full = parse_records_file(manifest.full_run_path)
    quant = parse_records_file(manifest.quantized_run_path)
    pairs = pair_runs(full, quant, strict=options.strict)
    return build_report(
        pairs,
        manifest.task_kind,
        options,
        model_full=full[0].model_id,
        model_quantized=quant[0].model_id,
    )


# ---------------------------------------------------------------------------
# Rendering
# ---------------------------------------------------------------------------

def _pct(v: Optional[float]) -> str:
    return "—" if v is None else f"{v * 100:.2f}"


def _pct_delta(v: Optional[float]) -> str:
    if v is None:
        return "—"
    return f"{'+' if v >= 0 else ''}{v * 100:.2f}"


def _star(report: ComparisonReport, metric: str) -> str:
    return STAR if report.significance.get(metric) else ""


def render_markdown(report: ComparisonReport) -> str:
    opts = report.options
    ce_label = opts["ce_kind"].upper()
    lines = [
        f"# Quantization comparison: {report.dataset_id}",
        "",
        f"- samples: {report.n} ({report.task_kind}, K={report.num_candidates})",
        f"- models: {report.model_full} vs {report.model_quantized}",
        f"- calibration error: {ce_label} with M={opts['num_bins']} bins",
        f"- confidence mode: {opts['conf_mode']}; alpha={opts['alpha']}",
        "- values are percentages (entropy x100); deltas are quantized - full; "
        f"{STAR} marks p < alpha",
        "",
        "## Scores",
        "",
        f"| Dataset | Acc | ΔAcc | {ce_label} | Δ{ce_label} |",
        "|---|---|---|---|---|",
        f"| {report.dataset_id} | {_pct(report.full['accuracy'])} "
        f"| {_pct_delta(report.deltas['accuracy'])} "
        f"| {_pct(report.full['ce'])} | {_pct_delta(report.deltas['ce'])} |",
        "",
        "## Confidence and entropy",
        "",
        "| Model | Conf | Conf_err | Conf_true | H |",
        "|---|---|---|---|---|",
        f"| full | {_pct(report.full['conf_mean'])} "
        f"| {_pct(report.full['conf_err'])} "
        f"| {_pct(report.full['conf_true'])} "
        f"| {_pct(report.full['entropy_mean'])} |",
        f"| quantized | {_pct(report.quantized['conf_mean'])}{_star(report, 'conf_mean')} "
        f"| {_pct(report.quantized['conf_err'])}{_star(report, 'conf_err')} "
        f"| {_pct(report.quantized['conf_true'])}{_star(report, 'conf_true')} "
        f"| {_pct(report.quantized['entropy_mean'])}{_star(report, 'entropy_mean')} |",
        f"| Δ | {_pct_delta(report.deltas['conf_mean'])} "
        f"| {_pct_delta(report.deltas['conf_err'])} "
        f"| {_pct_delta(report.deltas['conf_true'])} "
        f"| {_pct_delta(report.deltas['entropy_mean'])} |",
        "",
        "## Divergence",
        "",
        f"- JSD ({opts['jsd_variant']} shown): "
        + repr(
            report.jsd["jsd_halved"]
            if opts["jsd_variant"] == "halved"
            else report.jsd["jsd_paper_expanded"]
        ),
        f"- JSD halved: {report.jsd['jsd_halved']!r}",
        f"- JSD paper-expanded: {report.jsd['jsd_paper_expanded']!r}",
        f"- JS distance: {report.jsd['js_distance']!r}",
        f"- clamped entries: {report.jsd['clamped_entries']}",
        "",
        "## Confidence shifts",
        "",
        f"(binned by full-model {report.shift['key']}, "
        f"edges start at {report.shift['bin_edges'][0]:g})",
        "",
        "| bin | count | mean signed | mean abs |",
        "|---|---|---|---|",
    ]
    edges = report.shift["bin_edges"]
    for i, count in enumerate(report.shift["counts"]):
        ms = report.shift["mean_signed_shift"][i]
        ma = report.shift["mean_abs_shift"][i]
        ms_s = "—" if ms is None else f"{ms:+.4f}"
        ma_s = "—" if ma is None else f"{ma:.4f}"
        lines.append(
            f"| ({edges[i]:.3f}, {edges[i + 1]:.3f}] | {count} | {ms_s} | {ma_s} |"
        )
    lines.append("")
    lines.append(
        f"- largest mean absolute shift: bin {report.shift['argmax_abs_bin']}; "
        f"overall mean signed shift: {report.shift['overall_mean_signed']:+.6f}"
    )
    return "\n".join(lines) + "\n"


def render_csv(report: ComparisonReport) -> str:
    lines = ["metric,full,quantized,delta,significant"]
    for key in _DELTA_METRICS:
        f = report.full[key]
        q = report.quantized[key]
        d = report.deltas[key]
        sig = report.significance.get(key)
        lines.append(
            ",".join(
                [
                    key,
                    "" if f is None else repr(f),
                    "" if q is None else repr(q),
                    "" if d is None else repr(d),
                    "" if sig is None else str(sig),
                ]
            )
        )
    for key in ("jsd_halved", "jsd_paper_expanded", "js_distance"):
        lines.append(f"{key},,,{report.jsd[key]!r},")
    return "\n".join(lines) + "\n"


def render_json(report: ComparisonReport) -> str:
    return json.dumps(report.to_dict(), sort_keys=True, indent=2) + "\n"


def parse_json_report(text: str) -> ComparisonReport:
    return ComparisonReport.from_dict(json.loads(text))


def render(report: ComparisonReport, fmt: str = "markdown") -> str:
    if fmt == "markdown":
        return render_markdown(report)
    if fmt == "csv":
        return render_csv(report)
    if fmt == "json":
        return render_json(report)
    raise ValueError(f"unknown format: {fmt!r}")
