"""Builds the optional compiled hamming kernel.

The package works without the extension (a NumPy fallback is selected at
import time); building it just makes hamming-ball scans faster.
"""

from setuptools import Extension, setup

try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "semhash._hamming",
                ["src/semhash/_hamming.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
