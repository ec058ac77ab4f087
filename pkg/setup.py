"""Build script for the optional compiled Gibbs sweep kernel.

The package works without the extension (a numpy fallback is selected at
import time); building it just makes large fits faster.
"""

import os

import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

if cythonize is not None and os.path.exists("src/epvkit/mixture/_sweep.pyx"):
    ext_modules = cythonize(
        [
            Extension(
                "epvkit.mixture._sweep",
                ["src/epvkit/mixture/_sweep.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
else:
    ext_modules = []

setup(ext_modules=ext_modules)
