from setuptools import Extension, setup

import os

ext_modules = []
try:
    import numpy as np
    from Cython.Build import cythonize

    if not os.path.exists("src/mefkit/_kernels/_native.pyx"):
        raise ImportError
    ext_modules = cythonize(
        [
            Extension(
                "mefkit._kernels._native",
                ["src/mefkit/_kernels/_native.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
except ImportError:
    # Without Cython the package installs with the pure-Python kernels only.
    pass

setup(ext_modules=ext_modules)
