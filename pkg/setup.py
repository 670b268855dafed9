"""Builds the optional Cython chart kernel.

Without Cython or a C++ compiler the package still installs and falls back to
the pure-Python kernel.
"""
import os

from setuptools import setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as e:  # compiler missing etc.
            print(f"warning: compiled kernel not built ({e}); using pure Python")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as e:
            print(f"warning: could not build {ext.name} ({e}); using pure Python")


def extensions():
    if os.environ.get("PGFUZZ_NO_EXT"):
        return []
    try:
        from Cython.Build import cythonize
    except ImportError:
        return []
    from setuptools import Extension
    ext = Extension("pgfuzz._chart", ["src/pgfuzz/_chart.pyx"], language="c++",
                    extra_compile_args=["-O3", "-std=c++17"])
    return cythonize([ext], language_level=3)


setup(ext_modules=extensions(), cmdclass={"build_ext": optional_build_ext})
