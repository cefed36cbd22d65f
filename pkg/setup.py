import numpy
from setuptools import Extension, setup
from Cython.Build import cythonize

# The compiled kernel is optional: the package falls back to the numpy
# implementation at import time if the extension is missing.
ext = Extension(
    "drgrade.kernels._fast",
    ["src/drgrade/kernels/_fast.pyx"],
    include_dirs=[numpy.get_include()],
    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    extra_compile_args=["-O3"],
)

setup(ext_modules=cythonize([ext], language_level="3"))
