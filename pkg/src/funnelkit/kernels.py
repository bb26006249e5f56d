"""Backend selection for the level-set kernels.

The compiled module is used when it was built; set ``FUNNELKIT_PURE_PYTHON=1``
to force the numpy implementation.
"""
import os

import numpy as np

from . import _hj_py

BACKEND = "python"
_impl = _hj_py
if os.environ.get("FUNNELKIT_PURE_PYTHON") != "1":
    try:
        from . import _hj as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _hj_py


def hj_step(phi, vel, lam, backend=None):
    """One explicit upwind step ``phi - lam * max_v L_v(phi)``.

    ``vel`` has shape ``phi.shape + (m,)`` in 1D and ``phi.shape + (m, 2)`` in 2D.
    """
    impl = _select(backend)
    phi = np.ascontiguousarray(phi, dtype=np.float64)
    vel = np.ascontiguousarray(vel, dtype=np.float64)
    if phi.ndim == 1:
        if vel.ndim == 3:
            vel = np.ascontiguousarray(vel[..., 0])
        return impl.hj_step_1d(phi, vel, float(lam))
    return impl.hj_step_2d(phi, vel, float(lam))


def _select(backend):
    if backend is None:
        return _impl
    if backend == "python":
        return _hj_py
    if backend == "cython":
        from . import _hj

        return _hj
    raise ValueError(f"unknown backend {backend!r}")
