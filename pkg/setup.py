"""Build script for the optional compiled kernels.

The package works without the extension (a numpy fallback is selected at
import time); building it is strongly recommended for simulation campaigns.
"""

import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

if cythonize is not None:
    extensions = cythonize(
        [
            Extension(
                "fusetrack._kernels",
                sources=["src/fusetrack/_kernels.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                # keep results bit-identical to the numpy fallback: no
                # FMA contraction of a*a + b*b
                extra_compile_args=["-ffp-contract=off"],
            )
        ],
        language_level=3,
    )
else:
    extensions = []

setup(ext_modules=extensions)
