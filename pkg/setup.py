"""Build script: compiles the optional Cython kernel module.

The package works without the extension (pure-numpy fallback); the build
is best-effort so `pip install` never fails on a missing toolchain.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
    import numpy

    extensions = cythonize(
        [
            Extension(
                "tfde._kernels._kernels_c",
                sources=["src/tfde/_kernels/_kernels_c.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)
