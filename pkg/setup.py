import os

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

extensions = []
if cythonize is not None and not os.environ.get("COPELAND_SKIP_EXT"):
    extensions = cythonize(
        [
            Extension(
                "copeland._tallyx",
                ["src/copeland/_tallyx.pyx"],
                extra_compile_args=["-O3", "-fopenmp"],
                extra_link_args=["-fopenmp"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=extensions)
