"""Build script for the optional compiled kernel core.

The package works without the extension (a numpy fallback is selected at
import time), so any failure to cythonize or compile downgrades to a pure
source install instead of aborting.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    import numpy as np
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "latfft._kernels._core",
                ["src/latfft/_kernels/_core.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
except Exception as exc:  # pragma: no cover - build environment dependent
    print(f"latfft: building without compiled kernels ({exc})")

setup(ext_modules=ext_modules)
