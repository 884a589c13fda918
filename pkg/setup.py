"""Build script: compiles the optional shot-loop extension.

The package is pure Python apart from one hot kernel (`lpaisim._shotloop`).
If Cython or a C compiler is unavailable the build still succeeds and the
package falls back to the bit-identical pure-Python loop at import time.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    import os

    import numpy
    from Cython.Build import cythonize

    # The C samplers (random_normal/binomial/poisson) live in numpy's static
    # npyrandom library, not in any shared object on the default link path.
    npyrandom_dir = os.path.join(
        os.path.dirname(numpy.__file__), "random", "lib"
    )
    ext = Extension(
        "lpaisim._shotloop",
        sources=["src/lpaisim/_shotloop.pyx"],
        include_dirs=[numpy.get_include()],
        library_dirs=[npyrandom_dir],
        libraries=["npyrandom"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        optional=True,
    )
    ext_modules = cythonize(
        [ext],
        compiler_directives={"language_level": 3},
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
