"""Select the kernel implementation at import time.

The compiled extension ``srsg._core`` is used when it is importable;
otherwise the numpy module ``srsg._core_py`` is used. Setting the
environment variable ``SRSG_BACKEND=python`` forces the fallback.
"""

import importlib
import os

_NAMES = {"compiled": "srsg._core", "python": "srsg._core_py"}


def load(name):
    """Return the kernel module for ``name`` ("compiled" or "python")."""
    return importlib.import_module(_NAMES[name])


def available():
    out = []
    for name in _NAMES:
        try:
            load(name)
        except ImportError:
            continue
        out.append(name)
    return out


if os.environ.get("SRSG_BACKEND", "").lower() == "python":
    BACKEND = "python"
    kernels = load("python")
else:
    try:
        kernels = load("compiled")
        BACKEND = "compiled"
    except ImportError:
        kernels = load("python")
        BACKEND = "python"
