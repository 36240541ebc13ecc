"""Build script for the compiled propagation core.

The extension is optional: if Cython or a C compiler is unavailable the
package installs anyway and tcsync.backend falls back to the pure
numpy/scipy core at import time.
"""
import os

from setuptools import setup, Extension

ext_modules = []
try:
    import numpy as np
    from Cython.Build import cythonize

    ext = Extension(
        "tcsync._core",
        sources=[os.path.join("src", "tcsync", "_core.pyx")],
        include_dirs=[np.get_include()],
        extra_compile_args=["-O3"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    ext_modules = cythonize([ext], compiler_directives={"language_level": "3"})
except ImportError:
    pass

setup(ext_modules=ext_modules)
