import warnings

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

ext_modules = []
if cythonize is not None:
    ext = Extension(
        "radialspec._kernels._native",
        sources=["src/radialspec/_kernels/_native.pyx"],
        optional=True,
    )
    ext_modules = cythonize([ext], language_level="3")
else:
    warnings.warn("Cython unavailable; installing with the pure-Python kernels only")

setup(ext_modules=ext_modules)
