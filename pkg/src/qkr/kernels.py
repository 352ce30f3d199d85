"""Inner-loop kernels, compiled when available.

The Cython extension ``_kernels_c`` is used if it was built; otherwise the
numpy/pure-Python twin in ``_kernels_py`` is used.  Setting the environment
variable ``QKR_PURE_PYTHON=1`` before import forces the fallback.
"""
import importlib
import os

from . import _kernels_py

__all__ = [
    "BACKEND",
    "available_backends",
    "get_backend",
    "bessel_jn_array",
    "banded_apply",
    "orbit",
    "tangent_orbit",
    "lyapunov_log_growth",
]


def _load_compiled():
    try:
        return importlib.import_module(f"{__package__}._kernels_c")
    except ImportError:
        return None


_compiled = None if os.environ.get("QKR_PURE_PYTHON", "0") not in ("", "0") else _load_compiled()
_impl = _compiled if _compiled is not None else _kernels_py

BACKEND = "cython" if _compiled is not None else "python"


def available_backends():
    names = ["python"]
    if _load_compiled() is not None:
        names.append("cython")
    return names


def get_backend(name):
    """Return the kernel module called ``name`` (``"python"`` or ``"cython"``)."""
    if name == "python":
        return _kernels_py
    if name == "cython":
        mod = _load_compiled()
        if mod is None:
            raise ImportError("the compiled kernels were not built")
        return mod
    raise ValueError(f"unknown backend {name!r}")


bessel_jn_array = _impl.bessel_jn_array
banded_apply = _impl.banded_apply
orbit = _impl.orbit
tangent_orbit = _impl.tangent_orbit
lyapunov_log_growth = _impl.lyapunov_log_growth
