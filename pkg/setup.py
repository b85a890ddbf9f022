"""Build script for the optional compiled kernel extension.

The package works without the extension (a numpy backend is selected at
import time), so a failed compile only costs speed. Set QVC_BUILD_EXT=0
to skip the extension entirely.
"""

import os

from setuptools import setup

ext_modules = []
if os.environ.get("QVC_BUILD_EXT", "1") != "0":
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "quickvc.kernels._core",
                    sources=["src/quickvc/kernels/_core.pyx"],
                    include_dirs=[numpy.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                    extra_compile_args=["-O3", "-march=native", "-fno-math-errno"],
                )
            ],
            language_level=3,
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
