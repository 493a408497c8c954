import os
import sys

from setuptools import Extension, setup

# The compiled loop kernel is optional: without Cython or a C toolchain the
# package falls back to the pure-Python executor (see splitq.engine.kernels).
# -ffp-contract=off keeps the kernel's float arithmetic bit-identical to the
# interpreter paths (no fused multiply-add).
ext_modules = []
if os.environ.get("SPLITQ_NO_EXTENSION") != "1":
    try:
        import numpy
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "splitq.engine._fastloop",
                    ["src/splitq/engine/_fastloop.pyx"],
                    include_dirs=[numpy.get_include()],
                    extra_compile_args=["-O3", "-ffp-contract=off"],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            language_level=3,
        )
    except ImportError as exc:
        print(f"skipping compiled kernel ({exc}); pure-Python fallback will be used", file=sys.stderr)

setup(ext_modules=ext_modules)
