import numpy
from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    """Build the fast kernels if possible; the package works without them."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing, etc.
            print(f"lpfix: skipping native kernels ({exc}); "
                  "falling back to the NumPy implementation")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"lpfix: could not build {ext.name} ({exc}); "
                  "falling back to the NumPy implementation")


try:
    from Cython.Build import cythonize
    extensions = cythonize(
        [Extension(
            "lpfix.kernels._native",
            ["src/lpfix/kernels/_native.pyx"],
            extra_compile_args=["-O3"],
            include_dirs=[numpy.get_include()],
        )],
        language_level=3,
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions, cmdclass={"build_ext": OptionalBuildExt})
