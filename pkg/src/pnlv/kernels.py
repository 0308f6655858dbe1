"""Selects the compiled stepper when available and wraps it in a chunked driver.

Set PNLV_PURE=1 to force the pure-Python implementation.
"""
import os

import numpy as np

from . import _kernels_py

try:
    if os.environ.get("PNLV_PURE", "") not in ("", "0"):
        raise ImportError("pure Python requested")
    from . import _kernels as _impl
    COMPILED = True
except ImportError:
    _impl = _kernels_py
    COMPILED = False

KIND = {"PI": 0, "PII": 1, "PIV": 2, "WH": 3, "AIRY": 4}
SEGMENT, ARC = 0, 1

STATUS_DONE, STATUS_TRIGGER, STATUS_FULL, STATUS_UNDERFLOW, STATUS_NONFINITE = range(5)


def backend_name():
    return "cython" if COMPILED else "python"


def run_path(kind, par, pathkind, path, y0, s0=0.0, s1=1.0, flag=0, tol=1e-10,
             hmax=np.inf, trigger=0.0, trig_exp=1.0, aug=0, h0=None, chunk=4096,
             impl=None, max_samples=2_000_000):
    """Integrate along a parametrised path, collecting every accepted step.

    Returns (s, Y, flags, status, stats) where Y has one row per sample.
    """
    impl = impl or _impl
    n = _kernels_py.ndim(kind) + 2 * aug
    par = np.asarray(list(par) + [0j] * (2 - len(par)), dtype=complex)
    path = np.asarray(list(path) + [0j] * (4 - len(path)), dtype=complex)
    y = np.asarray(y0, dtype=complex).copy()
    if h0 is None:
        h0 = min(0.01, hmax) if np.isfinite(hmax) else 0.01
    stats = np.zeros(3, dtype=np.int64)
    pieces_s, pieces_y, pieces_f = [], [], []
    total = 0
    first = True
    while True:
        out_s = np.empty(chunk)
        out_y = np.empty(chunk * n, dtype=complex)
        out_f = np.empty(chunk, dtype=np.int32)
        m, status, s_last, h_last, flag = impl.run(
            kind, par, pathkind, path, float(s0), float(s1), y, int(flag),
            float(h0), float(tol), float(hmax), float(trigger), float(trig_exp),
            int(aug), out_s, out_y, out_f, stats)
        rows = out_y[:m * n].reshape(m, n)
        lo = 0 if first else 1  # the restart row repeats the previous end
        pieces_s.append(out_s[lo:m])
        pieces_y.append(rows[lo:])
        pieces_f.append(out_f[lo:m])
        total += m - lo
        first = False
        y = rows[-1].copy()
        s0, h0 = s_last, h_last
        if status != STATUS_FULL or total >= max_samples:
            break
    return (np.concatenate(pieces_s), np.concatenate(pieces_y),
            np.concatenate(pieces_f), status,
            {"accepted": int(stats[0]), "rejected": int(stats[1]),
             "attempted": int(stats[2])})
