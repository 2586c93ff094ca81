"""Pick the compiled kernels when available, else the numpy reference.

Set ``U2CASIMIR_PURE_PYTHON=1`` to force the numpy backend.
"""
import os

from . import _pykernels

BACKEND = "python"
kernels = _pykernels

if os.environ.get("U2CASIMIR_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as kernels  # noqa: F811
        BACKEND = "cython"
    except ImportError:
        pass

comb_integrand = kernels.comb_integrand
plate_bracket = kernels.plate_bracket
