import os

from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("CBIR_NO_EXTENSION"):
    try:
        from Cython.Build import cythonize
    except ImportError:
        cythonize = None
    if cythonize is not None:
        ext_modules = cythonize(
            [
                Extension(
                    "cbir._kernels",
                    ["src/cbir/_kernels.pyx"],
                    # exact float parity with the pure-Python path: no FMA contraction, no fast-math
                    extra_compile_args=["-O3", "-ffp-contract=off", "-fno-fast-math"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
