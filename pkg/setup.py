"""Build the optional Cython kernels.

The package works without them: ``kacbench.kernels`` falls back to the
NumPy implementation when the compiled module cannot be imported.
"""
import os

from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("KACBENCH_NO_EXT"):
    try:
        import numpy as np
        from Cython.Build import cythonize
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "kacbench._ckernels",
                    ["src/kacbench/_ckernels.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3"],
                    language="c++",
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
