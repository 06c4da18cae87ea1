"""Build script: compiles the optional fast kernels when Cython + a C compiler
are available, otherwise installs the pure-NumPy implementation only."""

import os
import sys

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("DIRACFLUX_NO_EXT") != "1":
    try:
        import numpy
        from Cython.Build import cythonize

        ext = Extension(
            "diracflux._kernels._fast",
            ["src/diracflux/_kernels/_fast.pyx"],
            include_dirs=[numpy.get_include()],
            extra_compile_args=["-O3", "-fopenmp"],
            extra_link_args=["-fopenmp"],
            define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        )
        ext_modules = cythonize([ext], compiler_directives={"language_level": "3"})
    except ImportError:
        print("cython/numpy unavailable at build time; installing without "
              "compiled kernels", file=sys.stderr)

setup(ext_modules=ext_modules)
