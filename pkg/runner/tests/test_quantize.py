import torch

from quantconf_runner.config import QuantSettings
from quantconf_runner.quantize import (
    compensated_quantize_weight,
    rtn_quantize_weight,
)


def test_rtn_hand_example():
    # One row, one group: max|w| = 1.0, maxq = 7, scale = 1/7,
    # codes round to [7, -4, 2, 5].
    w = torch.tensor([[1.0, -0.5, 0.25, 0.7]], dtype=torch.float64)
    cfg = QuantSettings(num_bits=4, group_size=4)
    got = rtn_quantize_weight(w, cfg)
    scale = 1.0 / 7.0
    expected = torch.tensor([[7.0, -4.0, 2.0, 5.0]], dtype=torch.float64) * scale
    assert torch.allclose(got, expected, atol=0, rtol=0)


def test_rtn_idempotent():
    torch.manual_seed(0)
    w = torch.randn(8, 32, dtype=torch.float64)
    cfg = QuantSettings(num_bits=4, group_size=16)
    once = rtn_quantize_weight(w, cfg)
    twice = rtn_quantize_weight(once, cfg)
    assert torch.equal(once, twice)


def test_rtn_zero_group_stays_zero():
    w = torch.zeros(3, 8, dtype=torch.float64)
    got = rtn_quantize_weight(w, QuantSettings(num_bits=4, group_size=4))
    assert torch.equal(got, w)


def test_compensated_diagonal_hessian_matches_rtn():
    torch.manual_seed(1)
    w = torch.randn(6, 16, dtype=torch.float64)
    cfg = QuantSettings(num_bits=4, group_size=8, method="compensated")
    h = torch.eye(16, dtype=torch.float64) * 3.0
    got = compensated_quantize_weight(w, h, cfg)
    want = rtn_quantize_weight(w, QuantSettings(num_bits=4, group_size=8))
    assert torch.allclose(got, want, atol=1e-12)


def test_compensated_reduces_calibration_error():
    torch.manual_seed(2)
    w = torch.randn(8, 24, dtype=torch.float64)
    x = torch.randn(64, 24, dtype=torch.float64)
    h = 2.0 * (x.T @ x)
    cfg = QuantSettings(num_bits=4, group_size=24, method="compensated")
    comp = compensated_quantize_weight(w, h, cfg)
    rtn = rtn_quantize_weight(w, QuantSettings(num_bits=4, group_size=24))
    err_comp = torch.sum((x @ (w - comp).T) ** 2)
    err_rtn = torch.sum((x @ (w - rtn).T) ** 2)
    assert err_comp <= err_rtn
