"""Kernel backend selection.

The compiled extension (``se23sim._core``) is preferred when importable;
the pure NumPy module is the fallback.  Override with the environment
variable SE23SIM_BACKEND = "compiled" | "python" | "auto".
"""

import os

_requested = os.environ.get("SE23SIM_BACKEND", "auto").lower()

if _requested in ("auto", "compiled", "cy", "c"):
    try:
        from . import _core as kernels
    except ImportError:
        if _requested != "auto":
            raise
        from . import _purepy as kernels
elif _requested in ("python", "py", "pure"):
    from . import _purepy as kernels
else:
    raise ValueError(f"unknown SE23SIM_BACKEND={_requested!r}")

BACKEND = kernels.BACKEND


def available_backends():
    """Names of importable kernel backends."""
    names = ["python"]
    try:
        from . import _core  # noqa: F401
        names.insert(0, "compiled")
    except ImportError:
        pass
    return names
