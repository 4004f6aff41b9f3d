"""Pick the compiled kernel if it was built, else the numpy fallback.

Set ``HYPBERGMAN_BACKEND=python`` to force the fallback.
"""
import os

from . import _kernels_py

if os.environ.get("HYPBERGMAN_BACKEND", "").lower() == "python":
    kernels = _kernels_py
else:
    try:
        from . import _kernels as kernels
    except ImportError:
        kernels = _kernels_py

BACKEND = kernels.BACKEND
series_shells = kernels.series_shells
