"""Build script.

The only compiled piece is minklab._core._speedups, a Cython translation of
the closed-orbit search kernel.  The package works without it (a pure-Python
reference backend is selected at import time), so a failed compile downgrades
to a warning instead of breaking the install.
"""

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:  # missing compiler, broken toolchain, ...
            self._skip(exc)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            self._skip(exc)

    @staticmethod
    def _skip(exc):
        print(f"WARNING: skipping compiled core ({exc!r}); "
              "the pure-Python backend will be used")


def extensions():
    try:
        from Cython.Build import cythonize
    except ImportError:
        print("WARNING: Cython not available; building without the compiled core")
        return []
    ext = Extension(
        "minklab._core._speedups",
        ["src/minklab/_core/_speedups.pyx"],
    )
    return cythonize([ext], language_level=3)


setup(ext_modules=extensions(), cmdclass={"build_ext": OptionalBuildExt})
