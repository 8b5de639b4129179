"""Kernel dispatch: compiled extension when built, numpy fallback otherwise.

Set ``RULEVOTE_PURE_PYTHON=1`` to force the fallback (used by the test-suite
to check both paths agree).
"""

import os

import numpy as np

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if not os.environ.get("RULEVOTE_PURE_PYTHON"):
    try:
        from . import _kernels as _compiled
    except ImportError:  # extension not built
        pass
    else:
        _impl = _compiled
        BACKEND = "cython"


def _i64(a):
    return np.ascontiguousarray(a, dtype=np.int64)


def value_counts(codes, rows, offsets, total):
    return _impl.value_counts(np.ascontiguousarray(codes, dtype=np.int32), _i64(rows),
                              _i64(offsets), int(total))


def satisfied_counts(codes, lit_attr, lit_lo, lit_hi, lit_neg, lit_rule, n_rules):
    return _impl.satisfied_counts(
        np.ascontiguousarray(codes, dtype=np.int32), _i64(lit_attr), _i64(lit_lo),
        _i64(lit_hi), np.ascontiguousarray(lit_neg, dtype=np.uint8), _i64(lit_rule),
        int(n_rules))


def gradient_histogram(bins, rows, grad, hess, offsets, total):
    return _impl.gradient_histogram(
        np.ascontiguousarray(bins, dtype=np.int32), _i64(rows),
        np.ascontiguousarray(grad, dtype=np.float64),
        np.ascontiguousarray(hess, dtype=np.float64), _i64(offsets), int(total))


def use_backend(name):
    """Switch backend at runtime ("cython" or "python"); returns the previous one."""
    global _impl, BACKEND
    previous = BACKEND
    if name == "python":
        _impl = _kernels_py
    elif name == "cython":
        from . import _kernels as compiled
        _impl = compiled
    else:
        raise ValueError(f"unknown kernel backend {name!r}")
    BACKEND = name
    return previous
