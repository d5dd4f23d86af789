import numpy
from setuptools import setup

try:
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "caloronkit._flowkern",
                ["src/caloronkit/_flowkern.pyx"],
                extra_compile_args=["-O3"],
                include_dirs=[numpy.get_include()],
            )
        ],
        language_level=3,
    )
except ImportError:
    # Pure-python fallback is selected at import time; the package works
    # without the compiled kernel.
    ext_modules = []

setup(ext_modules=ext_modules)
