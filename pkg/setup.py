"""Build hook for the optional native similarity-scan extension.

The package is pure Python; bookforge._simscan is a Cython speedup for the
nearest-neighbor scan used by decontamination. If Cython or a C compiler is
missing (or BOOKFORGE_NO_NATIVE=1 is set) the build proceeds without it and
bookforge.kernels falls back to the numpy implementation at import time.
"""

import os

from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("BOOKFORGE_NO_NATIVE"):
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "bookforge._simscan",
                    ["src/bookforge/_simscan.pyx"],
                    extra_compile_args=[
                        "-O3",
                        "-march=native",
                        "-ffast-math",
                        "-funroll-loops",
                    ],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
