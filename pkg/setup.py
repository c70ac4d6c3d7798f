"""Builds the optional compiled projection kernel.

The package works without it: jolopt._kernels falls back to the pure-numpy
implementation when the extension is absent or fails to compile.
"""

from setuptools import Extension, setup

import numpy as np

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

ext_modules = []
if cythonize is not None:
    ext_modules = cythonize(
        [
            Extension(
                "jolopt._kernels.dykstra_cy",
                ["src/jolopt/_kernels/dykstra_cy.pyx"],
                include_dirs=[np.get_include()],
                optional=True,
            )
        ],
        language_level=3,
    )

setup(ext_modules=ext_modules)
