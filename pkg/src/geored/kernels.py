"""Backend selection for the numeric kernels.

The compiled extension ``geored._ckernels`` is used when it imports;
otherwise the numpy fallback in ``geored._pykernels`` is used. Setting
``GEORED_PURE_PYTHON=1`` forces the fallback.
"""
from __future__ import annotations

import logging
import os

from . import _pykernels

log = logging.getLogger(__name__)

_impl = _pykernels
if os.environ.get("GEORED_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]
    except ImportError:  # pragma: no cover - depends on the build
        log.debug("compiled kernels unavailable, using numpy fallback")
        _impl = _pykernels

BACKEND: str = _impl.BACKEND

christoffel_from_metric = _impl.christoffel_from_metric
quad_contract = _impl.quad_contract
connection_table = _impl.connection_table
rk4_integrate = _impl.rk4_integrate
eval_program = _impl.eval_program
eval_programs = _impl.eval_programs

MAX_STACK = _pykernels.MAX_STACK


def available_backends():
    """Map backend name to kernel module for every backend that imports."""
    out = {"python": _pykernels}
    try:
        from . import _ckernels

        out["cython"] = _ckernels
    except ImportError:  # pragma: no cover
        pass
    return out
