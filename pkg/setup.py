"""Build hook for the optional compiled kernels; metadata lives in pyproject.toml."""
import os

from setuptools import setup

ext_modules = []
if not os.environ.get("NLGAUGE_NO_EXT"):
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [Extension("nlgauge._kernels", ["src/nlgauge/_kernels.pyx"],
                       include_dirs=[numpy.get_include()], extra_compile_args=["-O3"])],
            compiler_directives={"language_level": "3", "boundscheck": False,
                                 "wraparound": False, "cdivision": True},
        )

setup(ext_modules=ext_modules)
