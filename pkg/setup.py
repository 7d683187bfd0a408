import os

from setuptools import setup

ext_modules = []
if os.environ.get("MGSIM_NO_EXT") != "1":
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "mgsim._kernels._fast",
                    ["src/mgsim/_kernels/_fast.pyx"],
                    include_dirs=[numpy.get_include()],
                    extra_compile_args=["-O3", "-ffp-contract=off"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
