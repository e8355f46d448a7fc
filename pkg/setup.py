"""Build script: compiles the optional fast-kernel extension.

The package is fully functional without the extension (numpy fallbacks are
selected at import time); `python setup.py build_ext --inplace` or a normal
pip install produces the compiled path.
"""

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "motion4d.kernels._fastk",
                ["src/motion4d/kernels/_fastk.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
