"""Backend selection for the per-step hot kernels.

``TFDE_BACKEND`` picks the implementation:

- ``auto`` (default): compiled extension if importable, else pure numpy;
- ``cython``: require the compiled extension, fail loudly if missing;
- ``numpy``: force the pure-numpy fallback.

Both implementations expose the same three functions and produce the same
floating-point results up to summation-order rounding.
"""

from __future__ import annotations

import os

from . import _kernels_py

_requested = os.environ.get("TFDE_BACKEND", "auto").strip().lower()

if _requested not in {"auto", "numpy", "cython"}:
    raise ImportError(
        f"TFDE_BACKEND={_requested!r} not recognized; "
        "use 'auto', 'numpy', or 'cython'"
    )

if _requested == "numpy":
    _impl = _kernels_py
    BACKEND = "numpy"
else:
    try:
        from . import _kernels_c as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        if _requested == "cython":
            raise ImportError(
                "TFDE_BACKEND=cython but the compiled kernel module is not "
                "available; reinstall with a working C toolchain"
            ) from None
        _impl = _kernels_py
        BACKEND = "numpy"

advance_history_inplace = _impl.advance_history_inplace
history_reduce = _impl.history_reduce
thomas_solve_core = _impl.thomas_solve_core

__all__ = [
    "BACKEND",
    "advance_history_inplace",
    "history_reduce",
    "thomas_solve_core",
]
