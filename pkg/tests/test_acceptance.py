"""Acceptance suite: one test per gate criterion, each printing a pass line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines.
"""

import json
import math
import shutil
import time

import numpy as np
import pytest
from click.testing import CliRunner
from scipy.integrate import quad

from quantconf.calibration import (
    BinSpec,
    EQUAL_MASS,
    EQUAL_WIDTH,
    ace,
    ece,
    entropy_of,
    predictive_entropy,
)
from quantconf.cli import main
from quantconf.divergence import HALVED, PAPER_EXPANDED, js_distance, jsd
from quantconf.quantlab import (
    ERROR_COMPENSATED,
    FIXTURE_SEEDS,
    RTN,
    QuantConfig,
    calibration_error_sq,
    quantize_compensated,
    quantize_rtn,
)
from quantconf.records import PairedDataset
from quantconf.report import render
from quantconf.scoring import PredictiveDistribution
from quantconf.shifts import default_range_start, shift_profile
from quantconf.stats import paired_t_test, t_sf_two_sided

from conftest import random_paired_dataset
from test_calibration import brute_force_ece, dist, random_run
from test_report_cli import bloom_fixture_report

LN2 = math.log(2.0)


def ok(msg):
    print(f"PASS: {msg}")


def test_ece_oracle_equivalence():
    rng = np.random.default_rng(2024)
    start = time.perf_counter()
    for _ in range(200):
        n = int(rng.integers(1, 101))
        m = int(rng.integers(1, 11))
        dists, labels = random_run(rng, n)
        conf = [d.confidence for d in dists]
        correct = [d.predicted_index == t for d, t in zip(dists, labels)]
        fast = ece(dists, labels, BinSpec(EQUAL_WIDTH, m))
        slow = brute_force_ece(conf, correct, m)
        assert abs(fast - slow) <= 1e-12
    elapsed = time.perf_counter() - start
    assert elapsed < 5.0
    ok(f"ECE matches brute-force oracle on 200 random runs within 1e-12 "
       f"({elapsed:.2f}s)")


def test_ace_hand_case_and_permutation_invariance():
    probs0 = [0.9, 0.8, 0.3, 0.4]
    labels = [0, 0, 1, 0]
    dists = [dist((p, 1.0 - p), true_index=t) for p, t in zip(probs0, labels)]
    value = ace(dists, labels, BinSpec(EQUAL_MASS, 2))
    assert abs(value - 0.15) <= 1e-12

    rng = np.random.default_rng(7)
    rdists, rlabels = random_run(rng, 97)
    base = ace(rdists, rlabels, BinSpec(EQUAL_MASS, 7))
    for _ in range(1000):
        perm = rng.permutation(97)
        sd = [rdists[i] for i in perm]
        sl = [rlabels[i] for i in perm]
        assert ace(sd, sl, BinSpec(EQUAL_MASS, 7)) == base
    ok("ACE hand case = 0.15 exactly; permutation-invariant over 10^3 shuffles")


def test_jsd_properties():
    rng = np.random.default_rng(99)
    assert abs(jsd([1.0, 0.0], [0.5, 0.5]) - 0.215761) <= 1e-6
    for _ in range(500):
        k = int(rng.integers(2, 10))
        p = rng.random(k) + 1e-9
        q = rng.random(k) + 1e-9
        h = jsd(p, q, HALVED)
        assert h == jsd(q, p, HALVED)
        assert jsd(p, p, HALVED) == 0.0
        assert h <= LN2 + 1e-12
        assert abs(jsd(p, q, PAPER_EXPANDED) - 2.0 * h) <= 1e-12
    for _ in range(10_000):
        k = int(rng.integers(2, 6))
        p, q, r = (rng.random(k) + 1e-9 for _ in range(3))
        assert js_distance(p, r) <= js_distance(p, q) + js_distance(q, r) + 1e-9
    ok("JSD symmetry/zero/bound/2x-expanded and hand case; sqrt-JSD triangle "
       "inequality on 10^4 triples")


def test_entropy():
    uniform4 = predictive_entropy(dist((0.25,) * 4))
    assert abs(uniform4 - 1.386294) <= 1e-9 or abs(uniform4 - math.log(4)) <= 1e-9
    assert f"{uniform4 * 100:.2f}" == "138.63"
    assert predictive_entropy(dist((1.0, 0.0, 0.0))) == 0.0
    rng = np.random.default_rng(5)
    ks = rng.integers(2, 12, size=100_000)
    for k in np.unique(ks):
        block = rng.dirichlet(np.ones(int(k)), size=int((ks == k).sum()))
        nz = block > 0
        h = -np.sum(np.where(nz, block * np.log(np.where(nz, block, 1.0)), 0.0), axis=1)
        assert np.all(h >= 0.0)
        assert np.all(h <= math.log(int(k)) + 1e-12)
    ok("entropy: uniform-over-4 = ln 4 (renders 138.63), one-hot = 0, "
       "0 <= H <= ln K on 10^5 random distributions")


def test_paired_t_test():
    r = paired_t_test([0.1, 0.2, 0.3], [0.0, 0.0, 0.0])
    assert abs(r.t_stat - 3.4641) <= 1e-4
    # closed-form df=2 CDF: F(t) = 1/2 + t / (2 sqrt(2) sqrt(1 + t^2/2))
    f = 0.5 + r.t_stat / (2 * math.sqrt(2) * math.sqrt(1 + r.t_stat**2 / 2))
    assert abs(r.p_value - 2 * (1 - f)) <= 1e-12
    assert abs(r.p_value - 0.0742) <= 5e-4
    assert not r.significant

    def density(x, df):
        c = math.exp(
            math.lgamma((df + 1) / 2) - math.lgamma(df / 2)
        ) / math.sqrt(df * math.pi)
        return c * (1 + x * x / df) ** (-(df + 1) / 2)

    for df in (2, 5, 30, 1000):
        for t in (-10.0, -4.0, -1.3, 0.0, 0.5, 2.0, 7.5, 10.0):
            tail, _ = quad(density, abs(t), math.inf, args=(df,))
            assert abs(t_sf_two_sided(t, df) - 2 * tail) <= 1e-8
    ok("paired t-test hand case (t=3.4641, p=0.0742) and quadrature agreement "
       "within 1e-8 for df in {2,5,30,1000}")


def test_shift_profiles():
    rng = np.random.default_rng(31)
    for _ in range(1000):
        n = int(rng.integers(1, 80))
        k = int(rng.choice([2, 4]))
        pairs = random_paired_dataset(rng, n=n, k=k)
        profile = shift_profile(pairs)
        assert profile.bin_edges[0] == (0.5 if k == 2 else 0.25)
        assert sum(profile.counts) == n
        weighted = sum(
            c * s
            for c, s in zip(profile.counts, profile.mean_signed_shift)
            if s is not None
        )
        assert abs(weighted - n * profile.overall_mean_signed) <= 1e-9
    pairs = random_paired_dataset(rng, n=60, k=4)
    fwd = shift_profile(pairs, bin_on="full")
    bwd = shift_profile(pairs.swapped(), bin_on="quantized")
    for s1, s2 in zip(fwd.mean_signed_shift, bwd.mean_signed_shift):
        assert (s1 is None and s2 is None) or s2 == -s1
    assert fwd.mean_abs_shift == bwd.mean_abs_shift
    ok("shift profiles: partition + weighted-mean identities on 10^3 runs, "
       "exact swap negation, bin start 0.5 (binary) / 0.25 (4-way)")


def test_quantizer():
    rng = np.random.default_rng(12)
    group = 8
    w = rng.normal(size=(1000, 800))  # 100,000 groups
    cfg = QuantConfig(num_bits=4, group_size=group)
    layer = quantize_rtn(w, cfg)
    err = np.abs(w - layer.dequantize())
    bound = np.repeat(layer.scales, group, axis=1) / 2
    assert np.all(err <= bound)

    hand = quantize_rtn(np.array([[1.0, -0.5, 0.25, 0.7]]),
                        QuantConfig(num_bits=4, group_size=4))
    assert list(hand.q[0]) == [7, -4, 2, 5]

    cfg_c = QuantConfig(num_bits=4, group_size=4, method=ERROR_COMPENSATED)
    cfg_r = QuantConfig(num_bits=4, group_size=4, method=RTN)
    for seed in FIXTURE_SEEDS:
        srng = np.random.default_rng(seed)
        ws = srng.normal(size=(8, 16))
        xs = srng.normal(size=(4, 16))
        comp = quantize_compensated(ws, xs, cfg_c)
        base = quantize_rtn(ws, cfg_r)
        assert calibration_error_sq(ws, comp, xs) <= calibration_error_sq(ws, base, xs)

    wd = rng.normal(size=(6, 8))
    diag = 3.0 * np.eye(8)
    cfg_c8 = QuantConfig(num_bits=4, group_size=4, method=ERROR_COMPENSATED)
    comp = quantize_compensated(wd, diag, cfg_c8)
    base = quantize_rtn(wd, QuantConfig(num_bits=4, group_size=4))
    assert np.array_equal(comp.q, base.q)
    ok("quantizer: RTN error bound on 10^5 groups, hand codes [7,-4,2,5], "
       "compensated <= RTN on shipped seeds, diagonal-Hessian reduction exact")


def test_end_to_end_determinism(tmp_path):
    runner = CliRunner()
    outputs = []
    for sub in ("a", "b"):
        out = tmp_path / sub
        res = runner.invoke(
            main,
            ["fixtures", "--seed", "42", "--n", "200", "--group", "8",
             "--out", str(out)],
        )
        assert res.exit_code == 0, res.output
        for fmt in ("markdown", "json", "csv"):
            res = runner.invoke(
                main,
                ["compare", "--manifest", str(out / "manifest.json"),
                 "--format", fmt],
            )
            assert res.exit_code == 0, res.output
            outputs.append((fmt, res.output))
    half = len(outputs) // 2
    assert outputs[:half] == outputs[half:]

    out = tmp_path / "a"
    shutil.copy(out / "full.jsonl", out / "full2.jsonl")
    stub = {
        "full_run_path": "full.jsonl",
        "quantized_run_path": "full2.jsonl",
        "dataset_id": "toy",
        "task_kind": "multiclass",
    }
    (out / "identical.json").write_text(json.dumps(stub))
    res = runner.invoke(
        main,
        ["compare", "--manifest", str(out / "identical.json"), "--format", "json"],
    )
    assert res.exit_code == 0, res.output
    report = json.loads(res.output)
    for key, value in report["deltas"].items():
        assert value in (None, 0.0), key
    assert report["jsd"]["jsd_halved"] == 0.0
    assert not any(bool(v) for v in report["significance"].values())
    ok("end-to-end determinism: seed-42 fixtures+compare byte-identical; "
       "identical inputs give zero deltas, zero JSD, no flags")


def test_table_reproduction_formatting():
    md = render(bloom_fixture_report(), "markdown")
    assert "| arc_easy | 65.03 | -1.56 | 15.57 | +1.06 |" in md
    assert "| full | 96.26 | 95.64 | 46.24 | 12.87 |" in md
    assert "45.23⋆" in md
    ok("table reproduction: Acc 65.03 / Δ-1.56, CE 15.57 / Δ+1.06 and the "
       "96.26/95.64/46.24/12.87 row with ⋆ on Conf_true render cell-for-cell")
