import os

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pure-Python install; the package falls back at import time
    cythonize = None

ext_modules = []
if cythonize is not None and not os.environ.get("SMMDIST_NO_EXT"):
    ext_modules = cythonize(
        [Extension("smmdist._kernels", ["src/smmdist/_kernels.pyx"])],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
