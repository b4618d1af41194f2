"""Build script for the optional compiled kernel extension.

The extension is marked optional: if Cython or a C toolchain is missing the
install still succeeds and the package falls back to the numpy kernels.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "cavdd._kernels",
                ["src/cavdd/_kernels.pyx"],
                extra_compile_args=["-O3"],
                optional=True,
            )
        ],
        language_level=3,
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
