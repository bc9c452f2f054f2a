"""Build hooks for the optional compiled kernels.

The package is pure Python plus one Cython extension holding the mixture
density/gradient kernels.  The extension is marked optional: if it fails to
compile the install still succeeds and the numpy fallback in
cosmic.knife.reference is used at import time.
"""

from setuptools import Extension, setup

try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "cosmic.knife._speedups",
                sources=["src/cosmic/knife/_speedups.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                optional=True,
            )
        ],
        language_level=3,
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
