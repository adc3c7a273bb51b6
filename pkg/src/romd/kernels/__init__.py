"""Hot grid kernels with a compiled core and a numpy fallback.

The compiled extension is preferred when importable; set ROMD_DISABLE_EXT=1
to force the numpy path (used by the benchmark and for debugging).
"""
import os

if os.environ.get("ROMD_DISABLE_EXT") == "1":
    from . import _fallback as _impl
else:
    try:
        from . import _compiled as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _fallback as _impl

BACKEND = _impl.BACKEND
laplacian_batch = _impl.laplacian_batch
gaussian_poly_field = _impl.gaussian_poly_field
gaussian_poly_moments = _impl.gaussian_poly_moments

__all__ = [
    "BACKEND",
    "laplacian_batch",
    "gaussian_poly_field",
    "gaussian_poly_moments",
]
