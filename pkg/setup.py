"""Build script for the optional compiled kernel extension.

The package works without the extension (a numpy fallback is selected at
import time); compilation failures therefore downgrade to a warning instead
of failing the install.
"""

import sys

from setuptools import setup

try:
    import numpy as np
    from Cython.Build import cythonize
    from setuptools.extension import Extension

    extensions = cythonize(
        [
            Extension(
                "starfd._kernels._lapack_core",
                sources=["src/starfd/_kernels/_lapack_core.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except Exception as exc:  # pragma: no cover - build-env dependent
    print(f"starfd: compiled kernels disabled ({exc})", file=sys.stderr)
    extensions = []

setup(ext_modules=extensions)
