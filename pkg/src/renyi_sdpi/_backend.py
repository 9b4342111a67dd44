"""Pick the compiled kernels when available, the numpy ones otherwise.

Set ``SDPI_FORCE_PYTHON=1`` before import to force the fallback.
"""
import os

if os.environ.get("SDPI_FORCE_PYTHON", "") not in ("", "0"):
    from . import _fallback as kernels
    COMPILED = False
else:
    try:
        from . import _core as kernels
        COMPILED = True
    except ImportError:  # extension not built
        from . import _fallback as kernels
        COMPILED = False

NAME = "compiled" if COMPILED else "python"

__all__ = ["kernels", "COMPILED", "NAME"]
