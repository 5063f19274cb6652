"""Backend selection for the cube inner loops.

The compiled extension is preferred; the numpy fallback is used when it
failed to build or when the environment variable ``TALAGRAND_LAB_PURE`` is
set to a non-empty value other than ``0``.
"""
import os

from . import _pykernels

BACKEND = "python"
_impl = _pykernels

if os.environ.get("TALAGRAND_LAB_PURE", "0") in ("", "0"):
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:  # pragma: no cover - depends on build
        _impl = _pykernels

point_weights = _impl.point_weights
derivative_moments = _impl.derivative_moments
influences = _impl.influences
fwht = _impl.fwht


def implementations():
    """Return ``{name: module}`` for every importable backend."""
    out = {"python": _pykernels}
    try:
        from . import _ckernels

        out["cython"] = _ckernels
    except ImportError:  # pragma: no cover
        pass
    return out
