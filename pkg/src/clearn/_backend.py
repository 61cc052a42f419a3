"""Selects the compiled coordinate-descent kernel when it is importable.

Set ``CLEARN_PURE_PYTHON=1`` to force the pure-Python fallback.
"""
import os

from . import _cd_py

if os.environ.get("CLEARN_PURE_PYTHON", "") not in ("", "0"):
    cd_inner = _cd_py.cd_inner
    BACKEND = "python"
else:
    try:
        from ._cd import cd_inner
    except ImportError:  # extension not built
        cd_inner = _cd_py.cd_inner
        BACKEND = "python"
    else:
        BACKEND = "cython"


def available():
    """Names of the backends that can be selected in this process."""
    names = ["python"]
    try:
        from . import _cd  # noqa: F401
    except ImportError:
        pass
    else:
        names.insert(0, "cython")
    return names


def set_backend(name):
    """Switch the coordinate-descent kernel; returns the previous backend name."""
    global cd_inner, BACKEND
    previous = BACKEND
    if name == "python":
        cd_inner = _cd_py.cd_inner
    elif name == "cython":
        from ._cd import cd_inner as compiled

        cd_inner = compiled
    else:
        raise ValueError(f"unknown backend {name!r}")
    BACKEND = name
    return previous
