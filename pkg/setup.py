from setuptools import Extension, setup

import numpy

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

extensions = [
    Extension(
        "pcbayes.kernels._fast",
        ["src/pcbayes/kernels/_fast.pyx"],
        include_dirs=[numpy.get_include()],
        extra_compile_args=["-O3"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
]

if cythonize is not None:
    ext_modules = cythonize(extensions, language_level="3")
else:
    # building without cython is fine: the package falls back to the
    # pure-python kernels at import time
    ext_modules = []

setup(ext_modules=ext_modules)
