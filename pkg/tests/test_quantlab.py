import numpy as np
import pytest

from quantconf.quantlab import (
    ERROR_COMPENSATED,
    FIXTURE_SEEDS,
    RTN,
    QuantConfig,
    ToyModel,
    calibration_error_sq,
    generate_fixtures,
    quantize_compensated,
    quantize_model,
    quantize_rtn,
)
from quantconf.records import parse_records_file


def test_rtn_all_zero_matrix():
    cfg = QuantConfig(num_bits=4, group_size=2)
    layer = quantize_rtn(np.zeros((3, 6)), cfg)
    assert np.all(layer.q == 0)
    assert np.all(layer.scales == 1.0)
    assert np.all(layer.dequantize() == 0.0)


def test_rtn_exact_pair():
    cfg = QuantConfig(num_bits=4, group_size=2)
    layer = quantize_rtn(np.array([[1.0, -1.0]]), cfg)
    assert layer.scales[0, 0] == pytest.approx(1 / 7)
    assert list(layer.q[0]) == [7, -7]
    assert layer.dequantize()[0] == pytest.approx([1.0, -1.0], abs=1e-15)


def test_rtn_half_to_even_hand_case():
    cfg = QuantConfig(num_bits=4, group_size=4)
    layer = quantize_rtn(np.array([[1.0, -0.5, 0.25, 0.7]]), cfg)
    assert list(layer.q[0]) == [7, -4, 2, 5]  # -3.5 rounds half-to-even to -4
    assert layer.dequantize()[0] == pytest.approx(
        [1.0, -0.5714, 0.2857, 0.7143], abs=1e-4
    )


def test_rtn_error_bound(rng):
    cfg = QuantConfig(num_bits=4, group_size=8)
    w = rng.normal(size=(64, 64))
    layer = quantize_rtn(w, cfg)
    err = np.abs(w - layer.dequantize())
    bound = np.repeat(layer.scales, cfg.group_size, axis=1)[:, :64] / 2
    assert np.all(err <= bound)


def test_rtn_code_range(rng):
    for bits in (2, 3, 4, 8):
        cfg = QuantConfig(num_bits=bits, group_size=5)
        layer = quantize_rtn(rng.normal(size=(4, 17)), cfg)
        assert layer.q.max() <= cfg.maxq
        assert layer.q.min() >= -cfg.maxq


def test_rtn_idempotent(rng):
    cfg = QuantConfig(num_bits=4, group_size=4)
    w = rng.normal(size=(8, 16))
    layer = quantize_rtn(w, cfg)
    again = quantize_rtn(layer.dequantize(), cfg)
    assert np.array_equal(layer.q, again.q)


def test_rtn_rejects_non_finite():
    cfg = QuantConfig()
    with pytest.raises(ValueError, match="non-finite"):
        quantize_rtn(np.array([[np.nan, 1.0]]), cfg)


def test_compensated_diagonal_hessian_equals_rtn(rng):
    w = rng.normal(size=(6, 8))
    cfg_c = QuantConfig(num_bits=4, group_size=4, method=ERROR_COMPENSATED)
    cfg_r = QuantConfig(num_bits=4, group_size=4, method=RTN)
    x = 2.0 * np.eye(8)  # diagonal Hessian: no cross-column compensation
    comp = quantize_compensated(w, x, cfg_c)
    rtn = quantize_rtn(w, cfg_r)
    assert np.array_equal(comp.q, rtn.q)
    assert np.allclose(comp.scales, rtn.scales)


def test_compensated_single_column_equals_rtn(rng):
    w = rng.normal(size=(5, 1))
    cfg_c = QuantConfig(num_bits=4, group_size=1, method=ERROR_COMPENSATED)
    cfg_r = QuantConfig(num_bits=4, group_size=1, method=RTN)
    x = rng.normal(size=(6, 1))
    comp = quantize_compensated(w, x, cfg_c)
    assert np.array_equal(comp.q, quantize_rtn(w, cfg_r).q)


@pytest.mark.parametrize("seed", FIXTURE_SEEDS)
def test_compensated_beats_rtn_on_calibration_error(seed):
    rng = np.random.default_rng(seed)
    w = rng.normal(size=(8, 16))
    x = rng.normal(size=(4, 16))
    cfg_c = QuantConfig(num_bits=4, group_size=4, method=ERROR_COMPENSATED)
    cfg_r = QuantConfig(num_bits=4, group_size=4, method=RTN)
    comp = quantize_compensated(w, x, cfg_c)
    rtn = quantize_rtn(w, cfg_r)
    assert calibration_error_sq(w, comp, x) <= calibration_error_sq(w, rtn, x)


def test_compensated_code_range(rng):
    w = rng.normal(size=(8, 16))
    x = rng.normal(size=(10, 16))
    cfg = QuantConfig(num_bits=4, group_size=4, method=ERROR_COMPENSATED)
    layer = quantize_compensated(w, x, cfg)
    assert layer.q.max() <= cfg.maxq
    assert layer.q.min() >= -cfg.maxq


def test_config_validation():
    with pytest.raises(ValueError):
        QuantConfig(num_bits=1).validate()
    with pytest.raises(ValueError):
        QuantConfig(group_size=0).validate()
    with pytest.raises(ValueError):
        QuantConfig(damp_percent=0.0).validate()
    with pytest.raises(ValueError):
        QuantConfig(method="magic").validate()


def test_toy_model_deterministic():
    m1 = ToyModel.create(seed=5)
    m2 = ToyModel.create(seed=5)
    x = np.random.default_rng(0).normal(size=(3, m1.input_dim))
    assert np.array_equal(m1.log_probs(x), m2.log_probs(x))
    assert np.all(m1.log_probs(x) <= 0.0)


def test_generate_fixtures_single_sample(tmp_path):
    model = ToyModel.create(seed=3)
    full, quant = generate_fixtures(model, QuantConfig(group_size=8), 1, 9, tmp_path)
    rf = parse_records_file(full)
    rq = parse_records_file(quant)
    assert len(rf) == len(rq) == 1
    assert rf[0].sample_id == rq[0].sample_id
    assert rf[0].true_index == rq[0].true_index


def test_generate_fixtures_byte_deterministic(tmp_path):
    model = ToyModel.create(seed=3)
    cfg = QuantConfig(group_size=8)
    f1, q1 = generate_fixtures(model, cfg, 50, 42, tmp_path / "a")
    f2, q2 = generate_fixtures(model, cfg, 50, 42, tmp_path / "b")
    assert f1.read_bytes() == f2.read_bytes()
    assert q1.read_bytes() == q2.read_bytes()


def test_generate_fixtures_near_lossless_limit(tmp_path):
    model = ToyModel.create(seed=3)
    cfg = QuantConfig(num_bits=8, group_size=1)
    full, quant = generate_fixtures(model, cfg, 20, 5, tmp_path)
    rf = parse_records_file(full)
    rq = parse_records_file(quant)
    for a, b in zip(rf, rq):
        probs_a = np.exp(a.candidate_logprobs)
        probs_b = np.exp(b.candidate_logprobs)
        assert np.allclose(probs_a, probs_b, atol=1e-4)


def test_quantize_model_compensated_runs(rng):
    model = ToyModel.create(seed=1)
    calib = rng.normal(size=(32, model.input_dim))
    cfg = QuantConfig(num_bits=4, group_size=8, method=ERROR_COMPENSATED)
    quant = quantize_model(model, cfg, calib_inputs=calib)
    x = rng.normal(size=(5, model.input_dim))
    lp = quant.log_probs(x)
    assert np.all(np.isfinite(lp))
