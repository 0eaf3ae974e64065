import os

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pure-Python install; qaes falls back at import
    cythonize = None

ext_modules = []
if cythonize is not None and not os.environ.get("QAES_NO_EXTENSION"):
    ext_modules = cythonize(
        [
            Extension(
                "qaes._ckernels",
                ["src/qaes/_ckernels.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
