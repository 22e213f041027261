"""Build the optional Cython/FFTW time-stepping kernel.

If the extension cannot be compiled (no Cython, no FFTW headers) the
package still installs and falls back to the NumPy kernel at import.
"""
import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pragma: no cover
    cythonize = None

ext_modules = []
if cythonize is not None:
    ext_modules = cythonize(
        [
            Extension(
                "kgzlab._kernels",
                ["src/kgzlab/_kernels.pyx"],
                include_dirs=[np.get_include()],
                libraries=["fftw3", "m"],
                extra_compile_args=["-O3"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
