"""Quadrature backend selection.

The compiled extension (edsense._ext_core) is preferred; the scipy-based
fallback is used when it is missing.  EDSENSE_BACKEND=python or
EDSENSE_BACKEND=ext forces a choice (the latter raises if the extension was
not built).
"""

import os

_requested = os.environ.get("EDSENSE_BACKEND", "").strip().lower()

if _requested == "python":
    from . import _py_core as _impl
elif _requested == "ext":
    from . import _ext_core as _impl  # noqa: F401  (ImportError is the point)
else:
    try:
        from . import _ext_core as _impl
    except ImportError:
        from . import _py_core as _impl

BACKEND = _impl.BACKEND_NAME
eig_scaled = _impl.eig_scaled
eig_scaled_batch = _impl.eig_scaled_batch
