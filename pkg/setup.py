"""Builds the compiled solver core.

The extension is optional: if it cannot be built (no Cython, no compiler, or
RISKRFE_SKIP_EXT is set), the package falls back to the pure-NumPy solver at
import time.
"""

import os

from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("RISKRFE_SKIP_EXT"):
    try:
        from Cython.Build import cythonize
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "riskrfe.solvers._smo_cy",
                    ["src/riskrfe/solvers/_smo_cy.pyx"],
                )
            ],
            language_level="3",
        )

setup(ext_modules=ext_modules)
