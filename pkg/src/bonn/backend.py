"""Kernel backend selection.

The hot numeric kernels exist twice: numba-jitted loops and a pure
numpy fallback.  The environment variable ``BONN_NUMBA`` picks the
path: any of ``0/false/no/off`` (case-insensitive) forces numpy, and
numpy is also used when numba cannot be imported.  Both paths compute
the same functions; `benchmarks/bench_backends.py` compares them.
"""

import os


def numba_requested() -> bool:
    flag = os.environ.get("BONN_NUMBA", "1").strip().lower()
    return flag not in ("0", "false", "no", "off")


if numba_requested():
    try:
        from . import _kernels_numba as _impl
        BACKEND = "numba"
    except ImportError:
        from . import _kernels_numpy as _impl
        BACKEND = "numpy"
else:
    from . import _kernels_numpy as _impl
    BACKEND = "numpy"

affine_fwd = _impl.affine_fwd
affine_bwd = _impl.affine_bwd
sigmoid_fwd = _impl.sigmoid_fwd
sigmoid_bwd = _impl.sigmoid_bwd
tanh_fwd = _impl.tanh_fwd
tanh_bwd = _impl.tanh_bwd
relu_fwd = _impl.relu_fwd
relu_bwd = _impl.relu_bwd
softmax_fwd = _impl.softmax_fwd
softmax_bwd = _impl.softmax_bwd
gru_fwd = _impl.gru_fwd
gru_bwd = _impl.gru_bwd
