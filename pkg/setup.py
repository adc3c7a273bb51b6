"""Build script: compiles the optional stencil/lattice-sum extension.

The package works without the extension (a numpy fallback is selected at
import time); the build is therefore allowed to fail soft when no compiler
is available.
"""
import os
import sys

from setuptools import setup

ext_modules = []
if os.environ.get("ROMD_SKIP_EXT") != "1":
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "romd.kernels._compiled",
                    ["src/romd/kernels/_compiled.pyx"],
                    include_dirs=[numpy.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                    extra_compile_args=["-O3"],
                )
            ],
            language_level=3,
        )
    except Exception as exc:  # pragma: no cover - build-environment dependent
        sys.stderr.write(f"romd: skipping compiled kernels ({exc})\n")

setup(ext_modules=ext_modules)
