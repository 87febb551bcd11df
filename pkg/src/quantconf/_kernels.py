"""Hot numeric kernels: numba-compiled by default, pure numpy on demand.

Set QUANTCONF_NUMBA=0 (or "false"/"off"/"no") before import to force the
numpy fallback path. ``benchmarks/bench_kernels.py`` times both paths.
"""

import os

import numpy as np


def _numba_wanted() -> bool:
    flag = os.environ.get("QUANTCONF_NUMBA", "1").strip().lower()
    return flag not in ("0", "false", "off", "no")


USE_NUMBA = False
if _numba_wanted():
    try:
        from numba import njit

        USE_NUMBA = True
    except ImportError:  # pragma: no cover - numba is a declared dependency
        USE_NUMBA = False


# ---------------------------------------------------------------------------
# Round-to-nearest group quantization
# ---------------------------------------------------------------------------

def _rtn_rows_np(w, group_size, maxq):
    rows, cols = w.shape
    ngroups = -(-cols // group_size)
    pad = ngroups * group_size - cols
    wp = np.pad(w, ((0, 0), (0, pad))) if pad else w
    grouped = wp.reshape(rows, ngroups, group_size)
    amax = np.abs(grouped).max(axis=2)
    scales = np.where(amax > 0.0, amax / maxq, 1.0)
    codes = np.rint(grouped / scales[:, :, None])
    codes = codes.reshape(rows, ngroups * group_size)[:, :cols]
    return codes.astype(np.int64), scales


def _rtn_rows_loop(w, group_size, maxq):
    rows, cols = w.shape
    ngroups = (cols + group_size - 1) // group_size
    codes = np.empty((rows, cols), dtype=np.int64)
    scales = np.empty((rows, ngroups), dtype=np.float64)
    for r in range(rows):
        for g in range(ngroups):
            lo = g * group_size
            hi = min(cols, lo + group_size)
            amax = 0.0
            for c in range(lo, hi):
                a = abs(w[r, c])
                if a > amax:
                    amax = a
            scale = amax / maxq if amax > 0.0 else 1.0
            scales[r, g] = scale
            for c in range(lo, hi):
                codes[r, c] = int(np.rint(w[r, c] / scale))
    return codes, scales


# ---------------------------------------------------------------------------
# Error-compensated (GPTQ-style) column loop
# ---------------------------------------------------------------------------
# w is modified in place (caller passes a copy); hinv_u is the upper Cholesky
# factor of the inverse damped Hessian. Group scales are taken from the
# current (already error-adjusted) weights when the loop enters each group.

def _compensated_loop_np(w, hinv_u, group_size, maxq):
    rows, cols = w.shape
    ngroups = -(-cols // group_size)
    codes = np.empty((rows, cols), dtype=np.int64)
    scales = np.empty((rows, ngroups), dtype=np.float64)
    for j in range(cols):
        g = j // group_size
        if j % group_size == 0:
            hi = min(cols, j + group_size)
            amax = np.abs(w[:, j:hi]).max(axis=1)
            scales[:, g] = np.where(amax > 0.0, amax / maxq, 1.0)
        s = scales[:, g]
        q = np.clip(np.rint(w[:, j] / s), -maxq, maxq)
        codes[:, j] = q.astype(np.int64)
        err = (w[:, j] - q * s) / hinv_u[j, j]
        if j + 1 < cols:
            w[:, j + 1:] -= np.outer(err, hinv_u[j, j + 1:])
    return codes, scales


def _compensated_loop_loop(w, hinv_u, group_size, maxq):
    rows, cols = w.shape
    ngroups = (cols + group_size - 1) // group_size
    codes = np.empty((rows, cols), dtype=np.int64)
    scales = np.empty((rows, ngroups), dtype=np.float64)
    for j in range(cols):
        g = j // group_size
        if j % group_size == 0:
            hi = min(cols, j + group_size)
            for r in range(rows):
                amax = 0.0
                for c in range(j, hi):
                    a = abs(w[r, c])
                    if a > amax:
                        amax = a
                scales[r, g] = amax / maxq if amax > 0.0 else 1.0
        d = hinv_u[j, j]
        for r in range(rows):
            s = scales[r, g]
            q = np.rint(w[r, j] / s)
            if q > maxq:
                q = maxq
            elif q < -maxq:
                q = -maxq
            codes[r, j] = int(q)
            err = (w[r, j] - q * s) / d
            for c in range(j + 1, cols):
                w[r, c] -= err * hinv_u[j, c]
    return codes, scales


if USE_NUMBA:
    _rtn_rows_impl = njit(cache=True)(_rtn_rows_loop)
    _compensated_loop_impl = njit(cache=True)(_compensated_loop_loop)
else:
    _rtn_rows_impl = _rtn_rows_np
    _compensated_loop_impl = _compensated_loop_np


def rtn_rows(w, group_size, maxq):
    """Per-row, per-group symmetric RTN codes and scales."""
    w = np.ascontiguousarray(w, dtype=np.float64)
    return _rtn_rows_impl(w, group_size, float(maxq))


def compensated_loop(w, hinv_u, group_size, maxq):
    """Sequential column quantization with inverse-Hessian error spreading.

    Mutates ``w``; pass a copy.
    """
    return _compensated_loop_impl(w, hinv_u, group_size, float(maxq))
