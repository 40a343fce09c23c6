"""Build script: compiles the optional lexer extension when Cython and a C
toolchain are available, otherwise installs with the pure-Python fallback."""

import os

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """Swallow compiler failures so the package still installs pure-Python."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # missing toolchain, broken headers, ...
            print(f"warning: extension build skipped ({exc}); "
                  "using pure-Python lexer")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"warning: building {ext.name} failed ({exc}); "
                  "using pure-Python lexer")


ext_modules = []
if not os.environ.get("SCBENCH_PURE_PYTHON"):
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [Extension("scbench.corpus._lexer",
                       ["src/scbench/corpus/_lexer.pyx"])],
            language_level=3,
        )
    except ImportError:
        print("warning: Cython not available; using pure-Python lexer")

setup(ext_modules=ext_modules, cmdclass={"build_ext": optional_build_ext})
