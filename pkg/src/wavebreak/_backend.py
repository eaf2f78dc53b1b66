"""Select the compiled kernels when available, else the numpy fallback.

Set ``WAVEBREAK_PURE_PYTHON=1`` to force the fallback (used by the parity
tests and the benchmark).
"""
import os

if os.environ.get("WAVEBREAK_PURE_PYTHON"):
    from ._kernels_py import trig_sum

    BACKEND = "python"
else:
    try:
        from ._kernels import trig_sum

        BACKEND = "cython"
    except ImportError:  # extension not built
        from ._kernels_py import trig_sum

        BACKEND = "python"

__all__ = ["BACKEND", "trig_sum"]
