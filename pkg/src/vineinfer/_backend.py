"""Select compiled or pure-Python recursion kernels.

Set ``VINEINFER_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _recursions_py

BACKEND = "python"
arma_garch_recursion = _recursions_py.arma_garch_recursion
garch_simulate = _recursions_py.garch_simulate

if os.environ.get("VINEINFER_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from ._recursions import arma_garch_recursion, garch_simulate  # noqa: F401

        BACKEND = "cython"
    except ImportError:
        pass

__all__ = ["BACKEND", "arma_garch_recursion", "garch_simulate"]
