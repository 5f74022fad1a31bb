"""Build script for the optional compiled LSTM kernel.

The extension is marked optional: if no C compiler (or Cython) is available
the install still succeeds and the package falls back to the pure-numpy
kernel at import time.
"""

from setuptools import Extension, setup

try:
    import numpy
    from Cython.Build import cythonize
except ImportError:
    numpy = None
    cythonize = None

ext_modules = []
if cythonize is not None:
    ext = Extension(
        "discre.kernels._lstm_cy",
        sources=["src/discre/kernels/_lstm_cy.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3"],
        optional=True,
    )
    ext_modules = cythonize([ext], compiler_directives={"language_level": "3"})

setup(ext_modules=ext_modules)
