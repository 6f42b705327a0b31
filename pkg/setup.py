"""Builds the optional compiled kernel; the package works without it."""
import os

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "fgmtail._kernel",
                [os.path.join("src", "fgmtail", "_kernel.pyx")],
                # no FMA contraction: keeps sums identical to the numpy fallback
                extra_compile_args=["-O3", "-ffp-contract=off"],
            )
        ],
        language_level=3,
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
