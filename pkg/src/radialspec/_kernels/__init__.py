"""Kernel backend selection.

The compiled extension is preferred when it imported cleanly; the
pure-Python module is the fallback.  ``RADIALSPEC_BACKEND=pure`` forces the
fallback (used by the benchmark and the backend equivalence tests),
``RADIALSPEC_BACKEND=native`` makes a missing extension a hard error.
"""

import os

import numpy as np

from . import pure as _pure

_requested = os.environ.get("RADIALSPEC_BACKEND", "").strip().lower()

if _requested in ("pure", "python"):
    _impl = _pure
    BACKEND = "pure"
elif _requested in ("", "native", "compiled"):
    try:
        from . import _native as _impl
        BACKEND = "native"
    except ImportError:
        if _requested:
            raise
        _impl = _pure
        BACKEND = "pure"
else:
    raise RuntimeError(f"unknown RADIALSPEC_BACKEND value {_requested!r}")


def _f64(seq):
    return np.ascontiguousarray(seq, dtype=np.float64)


def transfer_chain(gaps, jumps, k):
    return _impl.transfer_chain(_f64(gaps), _f64(jumps), complex(k))


def solution_sweep(pos, codes, vals, k, x0, f0, df0):
    codes = np.ascontiguousarray(codes, dtype=np.intc)
    return _impl.solution_sweep(_f64(pos), codes, _f64(vals), complex(k),
                                float(x0), complex(f0), complex(df0))


def simon_stolz_sweep(breaks, sqrtb, k, step):
    return _impl.simon_stolz_sweep(_f64(breaks), _f64(sqrtb), float(k), float(step))


def riccati_left_sweep(pos, sqrtb, k, x_start, x_target, u0, v0):
    return _impl.riccati_left_sweep(_f64(pos), _f64(sqrtb), complex(k),
                                    float(x_start), float(x_target),
                                    complex(u0), complex(v0))


def riccati_right_sweep(pos, sqrtb, k, x_start, x_target, u0, v0):
    return _impl.riccati_right_sweep(_f64(pos), _f64(sqrtb), complex(k),
                                     float(x_start), float(x_target),
                                     complex(u0), complex(v0))
