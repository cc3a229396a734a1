"""Kernel backend selection.

Imports the compiled extension when it is available, otherwise the numpy
fallback. FUSETRACK_KERNELS=python forces the fallback (used by the
benchmark and the backend-parity tests); FUSETRACK_KERNELS=compiled fails
loudly if the extension is missing.
"""

import os

from . import _kernels_py

_requested = os.environ.get("FUSETRACK_KERNELS", "auto").lower()

if _requested == "python":
    _impl = _kernels_py
elif _requested == "compiled":
    from . import _kernels as _impl
else:
    try:
        from . import _kernels as _impl
    except ImportError:
        _impl = _kernels_py

BACKEND = _impl.BACKEND
frechet_dp = _impl.frechet_dp
dtw_dp = _impl.dtw_dp
sgm_aggregate = _impl.sgm_aggregate


def available_backends():
    """Names of the kernel implementations importable in this install."""
    names = ["python"]
    try:
        from . import _kernels  # noqa: F401
        names.insert(0, "compiled")
    except ImportError:
        pass
    return names
