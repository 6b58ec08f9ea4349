"""Builds the compiled assignment kernel. The package works without it:
protosphere._core falls back to the numpy implementation at import time."""

from setuptools import Extension, setup

try:
    import numpy
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "protosphere._core._lapjv",
                ["src/protosphere/_core/_lapjv.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
                optional=True,
            )
        ],
        language_level=3,
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)
