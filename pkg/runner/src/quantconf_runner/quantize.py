"""In-place post-training quantization of a model's linear layers.

Group-wise symmetric round-to-nearest (RTN) is the default.  An
error-compensated variant refines each weight column sequentially using a
Hessian built from calibration activations, propagating the rounding error of
each column into the not-yet-quantized remainder.
"""

from __future__ import annotations

import logging
from typing import Dict, Iterable, List, Optional, Tuple

import torch
from torch import nn

from .config import QuantSettings

log = logging.getLogger(__name__)


def _group_scales(w: torch.Tensor, group_size: int, maxq: int) -> torch.Tensor:
    """Per-(row, group) scales: max|w| within the group divided by maxq.

    All-zero groups get scale 1 so the codes stay zero.
    """
    rows, cols = w.shape
    n_groups = (cols + group_size - 1) // group_size
    scales = torch.empty((rows, n_groups), dtype=w.dtype, device=w.device)
    for g in range(n_groups):
        chunk = w[:, g * group_size:(g + 1) * group_size]
        amax = chunk.abs().amax(dim=1)
        s = amax / maxq
        s[amax == 0] = 1.0
        scales[:, g] = s
    return scales


def rtn_quantize_weight(w: torch.Tensor, cfg: QuantSettings) -> torch.Tensor:
    """Return the dequantized (fake-quantized) weight under group-wise RTN."""
    maxq = 2 ** (cfg.num_bits - 1) - 1
    scales = _group_scales(w, cfg.group_size, maxq)
    out = torch.empty_like(w)
    for g in range(scales.shape[1]):
        lo, hi = g * cfg.group_size, (g + 1) * cfg.group_size
        s = scales[:, g:g + 1]
        codes = torch.clamp(torch.round(w[:, lo:hi] / s), -maxq, maxq)
        out[:, lo:hi] = codes * s
    return out


def compensated_quantize_weight(
    w: torch.Tensor, hessian: torch.Tensor, cfg: QuantSettings
) -> torch.Tensor:
    """Error-compensated quantization of one weight matrix.

    ``hessian`` is 2 * X^T X accumulated over calibration inputs X with shape
    (in_features, in_features).  Damping of ``damp_percent`` times the mean
    diagonal is added before inversion.
    """
    maxq = 2 ** (cfg.num_bits - 1) - 1
    w = w.to(torch.float64).clone()
    h = hessian.to(torch.float64).clone()
    n = h.shape[0]
    damp = cfg.damp_percent * torch.mean(torch.diag(h))
    if damp <= 0:
        raise ValueError("degenerate calibration data: Hessian diagonal is zero")
    h += damp * torch.eye(n, dtype=h.dtype, device=h.device)
    hinv = torch.linalg.cholesky(torch.linalg.inv(h)).T  # upper factor

    out = torch.empty_like(w)
    scales = None
    for j in range(n):
        if j % cfg.group_size == 0:
            hi = min(j + cfg.group_size, n)
            amax = w[:, j:hi].abs().amax(dim=1)
            scales = amax / maxq
            scales[amax == 0] = 1.0
        col = w[:, j]
        codes = torch.clamp(torch.round(col / scales), -maxq, maxq)
        q = codes * scales
        out[:, j] = q
        err = (col - q) / hinv[j, j]
        if j + 1 < n:
            w[:, j + 1:] -= torch.outer(err, hinv[j, j + 1:])
    return out


class _InputCollector:
    """Forward hook accumulating 2 * X^T X for a linear layer's inputs."""

    def __init__(self, in_features: int):
        self.h = torch.zeros((in_features, in_features), dtype=torch.float64)

    def __call__(self, module, inputs, output):
        x = inputs[0].detach().reshape(-1, inputs[0].shape[-1]).to(torch.float64)
        self.h += 2.0 * (x.T @ x)


def named_linears(model: nn.Module) -> List[Tuple[str, nn.Linear]]:
    return [(n, m) for n, m in model.named_modules() if isinstance(m, nn.Linear)]


@torch.no_grad()
def quantize_model(
    model: nn.Module,
    cfg: QuantSettings,
    calib_batches: Optional[Iterable[torch.Tensor]] = None,
) -> nn.Module:
    """Quantize every ``nn.Linear`` weight in ``model`` in place.

    ``calib_batches`` (token-id tensors) is required for the compensated
    method; each batch is run through the model to accumulate per-layer
    Hessians before quantization.
    """
    cfg.validate()
    linears = named_linears(model)
    hessians: Dict[str, torch.Tensor] = {}
    if cfg.method == "compensated":
        if calib_batches is None:
            raise ValueError("compensated quantization requires calibration batches")
        collectors = {}
        handles = []
        for name, mod in linears:
            c = _InputCollector(mod.in_features)
            collectors[name] = c
            handles.append(mod.register_forward_hook(c))
        for batch in calib_batches:
            model(batch)
        for h in handles:
            h.remove()
        hessians = {name: c.h for name, c in collectors.items()}

    for name, mod in linears:
        w = mod.weight.data
        if cfg.method == "rtn":
            mod.weight.data = rtn_quantize_weight(w, cfg).to(w.dtype)
        else:
            mod.weight.data = (
                compensated_quantize_weight(w, hessians[name], cfg).to(w.dtype)
            )
        log.debug("quantized %s (%s)", name, tuple(w.shape))
    return model
