import os

from setuptools import Extension, setup

# The compiled LSTM kernel is optional: without Cython (or with
# ROTPROBE_NO_EXT=1) the package installs pure-Python and falls back to numpy.
ext_modules = []
if not os.environ.get("ROTPROBE_NO_EXT"):
    try:
        import numpy as np
        from Cython.Build import cythonize
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "rotprobe.numerics._lstm_ext",
                    ["src/rotprobe/numerics/_lstm_ext.pyx"],
                    include_dirs=[np.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
