"""Select the summation kernels at import time.

The compiled extension is preferred. Setting ``YAMABE_NONDEG_PURE=1`` in the
environment forces the pure-Python fallback, which is also used whenever the
extension failed to build.
"""

import os

if os.environ.get("YAMABE_NONDEG_PURE"):
    from . import _kernels_py as kernels

    BACKEND = "python"
else:
    try:
        from . import _kernels as kernels

        BACKEND = "compiled"
    except ImportError:
        from . import _kernels_py as kernels

        BACKEND = "python"

__all__ = ["kernels", "BACKEND"]
