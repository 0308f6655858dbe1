import os
import subprocess
import sys

import numpy as np
import pytest

from pnlv import _kernels_py, kernels


def _run(impl, kind, par, path, y0, **kw):
    return kernels.run_path(kernels.KIND[kind], par, kernels.SEGMENT, path, y0, impl=impl, **kw)


@pytest.mark.skipif(not kernels.COMPILED, reason="compiled kernels not built")
@pytest.mark.parametrize("kind,par,y0", [
    ("PI", [0j], [0.2, -0.1]),
    ("PII", [0.5 + 0j], [0.1 + 0.1j, 0.3]),
    ("PIV", [0.5 + 0j, -0.3 + 0j], [0.4, 0.2, 0.1]),
    ("WH", [2 + 0j, 1 + 0j], [-0.3]),
    ("AIRY", [0j, 1 + 0j], [0.2]),
])
def test_compiled_matches_pure(kind, par, y0):
    a = _run(kernels._impl, kind, par, [0.5, 2 + 1j], y0, tol=1e-12)
    b = _run(_kernels_py, kind, par, [0.5, 2 + 1j], y0, tol=1e-12)
    assert a[3] == b[3]
    # step sequences may drift apart in the last bits; the endpoints agree
    assert abs(len(a[0]) - len(b[0])) <= 2
    assert np.max(np.abs(a[1][-1] - b[1][-1])) < 1e-10 * (1 + np.max(np.abs(b[1][-1])))


def test_airy_riccati_against_closed_form():
    # w' = z/2 + w^2 with w(0) = 0 is -u'/u for u'' + (z/2) u = 0, u(0)=1, u'(0)=0
    from scipy.special import airy
    c = -2 ** (-1 / 3)
    A = np.array([[airy(0)[0], airy(0)[2]], [c * airy(0)[1], c * airy(0)[3]]])
    ab = np.linalg.solve(A, [1, 0])
    z = 1.5 + 0.5j
    ai, aip, bi, bip = airy(c * z)
    u = ab[0] * ai + ab[1] * bi
    u1 = c * (ab[0] * aip + ab[1] * bip)
    s, Y, F, st, _ = kernels.run_path(kernels.KIND["AIRY"], [0j, 1 + 0j], kernels.SEGMENT,
                                      [0j, z], [0j], tol=1e-13)
    assert st == kernels.STATUS_DONE
    w = Y[-1, 0] if F[-1] == 0 else 1 / Y[-1, 0]
    assert abs(w - (-u1 / u)) < 1e-10 * abs(u1 / u)


def test_pure_fallback_selected_by_env():
    env = dict(os.environ, PNLV_PURE="1")
    out = subprocess.run([sys.executable, "-c", "from pnlv import kernels; print(kernels.backend_name())"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
