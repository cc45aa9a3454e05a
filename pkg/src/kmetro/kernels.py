"""Backend selection for the hot kernels.

The compiled extension is used when it has been built; otherwise the
pure-Python versions are imported.  Setting ``KMETRO_PURE_PYTHON=1`` forces
the fallback (used by the benchmark and by the backend-parity tests).
"""
from __future__ import annotations

import os

from kmetro import _kernels_py

BACKEND = "python"
if os.environ.get("KMETRO_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from kmetro import _kernels as _compiled
    except ImportError:  # extension not built
        _compiled = None
    else:
        BACKEND = "cython"
else:
    _compiled = None

if _compiled is not None:
    wigner_d_matrix = _compiled.wigner_d_matrix
    composition_extremes = _compiled.composition_extremes
else:
    wigner_d_matrix = _kernels_py.wigner_d_matrix
    composition_extremes = _kernels_py.composition_extremes

__all__ = ["BACKEND", "wigner_d_matrix", "composition_extremes"]
