import os

import numpy
from setuptools import Extension, setup

# The compiled kernels are optional: the package falls back to the pure
# numpy implementations in quadcert._kernels_py when the extension is
# missing (see quadcert.kernels). QUADCERT_NO_EXT=1 skips the build.
ext_modules = []
if not os.environ.get("QUADCERT_NO_EXT"):
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "quadcert._kernels",
                    ["src/quadcert/_kernels.pyx"],
                    include_dirs=[numpy.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                    extra_compile_args=["-O3"],
                )
            ],
            language_level=3,
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
