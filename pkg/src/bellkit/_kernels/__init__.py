"""Hot numeric kernels.

The numba path is used when numba imports and ``BELLKIT_DISABLE_NUMBA`` is
unset (or "0"); otherwise the pure-numpy path is selected. Both modules expose
identical functions so tests and the benchmark can compare them directly.
"""

import os

from . import _numpy as numpy_impl

numba_impl = None
if os.environ.get("BELLKIT_DISABLE_NUMBA", "0") in ("", "0"):
    try:
        from . import _numba as numba_impl
    except ImportError:  # numba is an optional extra
        numba_impl = None

_impl = numba_impl if numba_impl is not None else numpy_impl
BACKEND = "numba" if numba_impl is not None else "numpy"

product_expectations = _impl.product_expectations
effective_operator = _impl.effective_operator
walsh_hadamard = _impl.walsh_hadamard
strategy_tables = _impl.strategy_tables
ascend = _impl.ascend

__all__ = [
    "BACKEND",
    "numpy_impl",
    "numba_impl",
    "product_expectations",
    "effective_operator",
    "walsh_hadamard",
    "strategy_tables",
    "ascend",
]
