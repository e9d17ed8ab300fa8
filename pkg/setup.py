"""Build script for the compiled SMO solver core.

The extension is optional at runtime: if the build (or import) fails,
pvlead falls back to the pure-NumPy solver in ``pvlead._smo_py``.
"""

from setuptools import Extension, setup

try:
    import numpy as np
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "pvlead._smo",
                ["src/pvlead/_smo.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
