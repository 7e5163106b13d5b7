"""Backend selection for the hot kernels.

The compiled extension is preferred; the pure-Python module is the fallback.
Set ``RANKQEC_PURE_PYTHON=1`` to force the fallback.
"""

from __future__ import annotations

import os

if os.environ.get("RANKQEC_PURE_PYTHON", "") not in ("", "0"):
    from ._purecore import gf_mul, rank_scan, rank_u64

    BACKEND = "python"
else:
    try:
        from ._core import gf_mul, rank_scan, rank_u64
    except ImportError:
        from ._purecore import gf_mul, rank_scan, rank_u64

        BACKEND = "python"
    else:
        BACKEND = "cython"

__all__ = ["BACKEND", "gf_mul", "rank_scan", "rank_u64"]
