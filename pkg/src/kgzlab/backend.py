"""Selects the time-stepping kernel at import.

The compiled FFTW kernel is used when it was built; setting
``KGZLAB_PURE=1`` forces the NumPy fallback.
"""
import os

from . import _pykernels as python_kernel

try:
    from . import _kernels as compiled_kernel
except ImportError:  # extension not built
    compiled_kernel = None

if compiled_kernel is not None and os.environ.get("KGZLAB_PURE", "") not in ("1", "true", "yes"):
    kernel = compiled_kernel
else:
    kernel = python_kernel

BACKEND = kernel.BACKEND
