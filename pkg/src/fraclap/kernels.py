"""Backend selection for the scalar kernels.

The compiled extension is used when importable; set ``FRACLAP_PURE_PYTHON=1``
to force the pure-Python fallback.
"""
import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py
if not os.environ.get("FRACLAP_PURE_PYTHON"):
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _kernels_py

profile = _impl.profile
sign_changes = _impl.sign_changes

__all__ = ["BACKEND", "profile", "sign_changes"]
