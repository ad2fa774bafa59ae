"""Kernel backend selection.

The compiled Cython core is preferred when it has been built; otherwise the
numpy fallback is used.  Setting the environment variable
``LATFFT_PURE_PYTHON=1`` forces the fallback regardless (used by the backend
benchmark and the equivalence tests).
"""

import importlib
import os

import numpy as np

from . import fallback

_core = None
if os.environ.get("LATFFT_PURE_PYTHON", "0") in ("", "0"):
    try:
        _core = importlib.import_module(__name__ + "._core")
    except ImportError:
        _core = None

BACKEND = "compiled" if _core is not None else "python"

# the compiled gather sorts an L-length buffer per row; past this it loses
_MAX_COMPILED_L = 128


def hc_count(d, bound, weights):
    if _core is not None:
        return _core.hc_count(d, float(bound), np.asarray(weights, dtype=np.float64))
    return fallback.hc_count(d, float(bound), np.asarray(weights, dtype=np.float64))


def hc_enumerate(d, bound, weights):
    if _core is not None:
        return _core.hc_enumerate(
            d, float(bound), np.asarray(weights, dtype=np.float64)
        )
    return fallback.hc_enumerate(
        d, float(bound), np.asarray(weights, dtype=np.float64)
    )


def rows_injective_mod(elems, p):
    elems = np.ascontiguousarray(elems, dtype=np.int64)
    if _core is not None:
        got = _core.rows_injective_mod(elems, int(p))
        if got >= 0:
            return bool(got)
    return fallback.rows_injective_mod(elems, int(p))


def detect_gather(elems, zmat, M, ghat, theta, hit_threshold, want_medians):
    """Dispatching wrapper; see fallback.detect_gather for the contract."""
    elems = np.ascontiguousarray(elems, dtype=np.int64)
    zmat = np.ascontiguousarray(zmat, dtype=np.int64)
    ghat = np.ascontiguousarray(ghat, dtype=np.complex128)
    L = zmat.shape[0]
    if want_medians and L % 2 == 0:
        raise ValueError("medians require an odd lattice count")
    if _core is not None and L <= _MAX_COMPILED_L:
        return _core.detect_gather(
            elems, zmat, int(M), ghat, float(theta), float(hit_threshold),
            bool(want_medians),
        )
    return fallback.detect_gather(
        elems, zmat, int(M), ghat, float(theta), float(hit_threshold),
        bool(want_medians),
    )
