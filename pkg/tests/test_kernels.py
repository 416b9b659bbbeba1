import os
import subprocess
import sys

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from fraclap import _kernels_py, kernels

try:
    from fraclap import _kernels as compiled
except ImportError:  # extension not built
    compiled = None

needs_compiled = pytest.mark.skipif(compiled is None, reason="compiled kernels not built")


def test_backend_name():
    assert kernels.BACKEND in ("cython", "python")
    if compiled is not None and not os.environ.get("FRACLAP_PURE_PYTHON"):
        assert kernels.BACKEND == "cython"


def test_pure_python_override():
    env = dict(os.environ, FRACLAP_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "from fraclap import kernels; print(kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


@pytest.mark.parametrize("s", [0.1, 0.25, 0.5, 0.75, 0.9])
def test_profile_against_mpmath(s):
    tau = np.array([1e-8, 1e-3, 0.5, 2.0, 40.0, 600.0])
    phi, dphi = _kernels_py.profile(s, tau)
    c = mpmath.mpf(2) ** (1 - s) / mpmath.gamma(s)
    ref = [float(c * mpmath.mpf(t) ** s * mpmath.besselk(s, t)) for t in tau]
    dref = [float(-c * mpmath.mpf(t) ** s * mpmath.besselk(1 - s, t)) for t in tau]
    assert np.allclose(phi, ref, rtol=1e-12, atol=0)
    assert np.allclose(dphi, dref, rtol=1e-12, atol=0)


@pytest.mark.parametrize("s, slope", [(0.25, -np.inf), (0.5, -1.0), (0.75, 0.0)])
def test_profile_at_origin(s, slope):
    phi, dphi = _kernels_py.profile(s, np.array([0.0]))
    assert phi[0] == 1.0 and dphi[0] == slope


@needs_compiled
@given(s=st.floats(0.02, 0.98), tau=arrays(np.float64, 16, elements=st.floats(0.0, 700.0)))
def test_profile_backends_agree(s, tau):
    a, da = _kernels_py.profile(s, tau)
    b, db = compiled.profile(s, tau)
    assert np.allclose(a, b, rtol=1e-14, atol=1e-300)
    assert np.allclose(da, db, rtol=1e-14, atol=1e-300, equal_nan=True)


@needs_compiled
@given(v=arrays(np.float64, st.integers(0, 50), elements=st.floats(-1, 1)), thr=st.floats(0, 0.5))
def test_sign_changes_backends_agree(v, thr):
    assert compiled.sign_changes(np.ascontiguousarray(v), thr) == _kernels_py.sign_changes(v, thr)
