"""Build the optional compiled stepper; the package falls back to pure Python without it."""
from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext

try:
    from Cython.Build import cythonize
    ext_modules = cythonize(
        [Extension("pnlv._kernels", ["src/pnlv/_kernels.pyx"])],
        compiler_directives={"language_level": 3},
    )
except Exception:  # Cython missing: install the pure-Python path only
    ext_modules = []


class optional_build_ext(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:
            print(f"warning: compiled kernels not built ({exc}); using pure Python")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"warning: failed to build {ext.name} ({exc}); using pure Python")


setup(ext_modules=ext_modules, cmdclass={"build_ext": optional_build_ext})
