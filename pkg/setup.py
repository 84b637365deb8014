import os

import numpy as np
from setuptools import setup

ext_modules = []
if os.environ.get("SE23SIM_PURE") != "1":
    try:
        from Cython.Build import cythonize
        ext_modules = cythonize(
            "src/se23sim/_core.pyx",
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        print("Cython not available; building pure-Python only")

setup(
    ext_modules=ext_modules,
    include_dirs=[np.get_include()],
)
