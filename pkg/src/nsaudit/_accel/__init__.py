"""Hot-kernel backend selection.

The compiled Cython extension is used when present; otherwise the numpy
fallback.  NSAUDIT_PURE_PYTHON=1 forces the fallback (used by the kernel
benchmark to compare both).
"""

import os

if os.environ.get("NSAUDIT_PURE_PYTHON", "") == "1":
    from . import _kernels_py as kernels
else:
    try:
        from . import _kernels as kernels  # type: ignore[attr-defined]
    except ImportError:
        from . import _kernels_py as kernels

BACKEND = kernels.BACKEND
helmholtz_rows = kernels.helmholtz_rows
helmholtz_apply = kernels.helmholtz_apply
inv_square_pair_sum = kernels.inv_square_pair_sum

__all__ = ["BACKEND", "helmholtz_rows", "helmholtz_apply", "inv_square_pair_sum", "kernels"]
