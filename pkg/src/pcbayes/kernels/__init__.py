"""Hot-loop kernels with a compiled core and a pure-python fallback.

The compiled extension is preferred when importable; set
``PCBAYES_FORCE_FALLBACK=1`` to force the python implementation.
Both expose the same functions and produce identical output.
"""
import os

from . import _ref

if os.environ.get("PCBAYES_FORCE_FALLBACK"):
    _impl = _ref
else:
    try:
        from . import _fast as _impl  # type: ignore[attr-defined]
    except ImportError:
        _impl = _ref

IMPLEMENTATION = _impl.IMPLEMENTATION

kalman_filter = _impl.kalman_filter
ffbs_draw = _impl.ffbs_draw
gamma_sde_scan = _impl.gamma_sde_scan

__all__ = ["IMPLEMENTATION", "kalman_filter", "ffbs_draw", "gamma_sde_scan", "_ref"]
