"""Element-kernel backend selection.

The compiled Cython kernels are preferred; a numpy implementation with the
same interface is the fallback. ``backend_name()`` reports which one is in
use, and ``get_backend(name)`` fetches a specific one (for the parity tests
and the benchmark).
"""

from . import numpy_backend

try:
    from . import _element_kernels as _compiled
except ImportError:
    _compiled = None

_active = _compiled if _compiled is not None else numpy_backend


def backend_name():
    return "compiled" if _active is _compiled and _compiled is not None else "numpy"


def available_backends():
    names = ["numpy"]
    if _compiled is not None:
        names.insert(0, "compiled")
    return names


def get_backend(name):
    if name == "numpy":
        return numpy_backend
    if name == "compiled":
        if _compiled is None:
            raise ValueError("compiled kernels are not available")
        return _compiled
    raise ValueError(f"unknown backend {name!r}")


def curl_curl_local(gref, wq, jinv, detj):
    return _active.curl_curl_local(gref, wq, jinv, detj)
