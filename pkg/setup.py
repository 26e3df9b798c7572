"""Build script for the optional compiled kernel core.

The package works without the extension: ``seamfold._core`` falls back to
the numpy implementation when the compiled module is absent.
"""

from setuptools import Extension, setup

try:
    import numpy
    from Cython.Build import cythonize
except ImportError:  # pragma: no cover - source-only install
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "seamfold._core._kernels",
                ["src/seamfold/_core/_kernels.pyx"],
                include_dirs=[numpy.get_include()],
                # -ffp-contract=off keeps float results bit-identical to the
                # numpy fallback (no FMA re-association).
                extra_compile_args=["-O3", "-ffp-contract=off"],
            )
        ],
        language_level=3,
    )

setup(ext_modules=ext_modules)
