import warnings

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        ["src/sflab/kernels/_speedup.pyx"],
        compiler_directives={"language_level": "3"},
    )
except Exception as exc:  # pragma: no cover - build-env dependent
    warnings.warn(f"compiled kernels skipped, using pure-Python backend: {exc}")

setup(ext_modules=ext_modules)
