"""Build the optional Cython kernels; the package falls back to numpy without them.

``PTFOPT_NO_EXT=1`` skips the extensions, ``PTFOPT_PORTABLE=1`` drops the
host-specific AVX2 flag.
"""

import os
import sys

import numpy as np
from setuptools import Extension, setup


def _host_has_avx2():
    if os.environ.get("PTFOPT_PORTABLE") or not sys.platform.startswith("linux"):
        return False
    try:
        with open("/proc/cpuinfo") as fh:
            return " avx2" in fh.read()
    except OSError:
        return False


def _extensions():
    if os.environ.get("PTFOPT_NO_EXT"):
        return []
    try:
        from Cython.Build import cythonize
    except ImportError:
        return []
    common = dict(
        include_dirs=[np.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    # fast-math lets gcc call glibc's vector sin (libmvec); no -mfma so
    # |u - p|^2 rounds exactly as in the numpy fallback
    ptf_flags = ["-O3", "-fopenmp", "-ffast-math"]
    ptf_links = ["-fopenmp"]
    if sys.platform.startswith("linux"):
        ptf_links.append("-lmvec")
    if _host_has_avx2():
        ptf_flags.append("-mavx2")
    exts = [
        Extension("ptfopt._ptf_kernel", ["src/ptfopt/_ptf_kernel.pyx"],
                  extra_compile_args=ptf_flags, extra_link_args=ptf_links, **common),
        Extension("ptfopt._scan_kernel", ["src/ptfopt/_scan_kernel.pyx"],
                  extra_compile_args=["-O3", "-fopenmp"], extra_link_args=["-fopenmp"], **common),
    ]
    return cythonize(exts, compiler_directives={"language_level": "3"})


setup(ext_modules=_extensions())
