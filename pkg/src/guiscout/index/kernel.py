"""Backend selection for the hot kernels.

Prefers the compiled extension; falls back to the pure-Python/numpy
implementation when the extension is unavailable or when
GUISCOUT_BACKEND=python forces the fallback (useful for benchmarking
the two against each other).
"""

import os

if os.environ.get("GUISCOUT_BACKEND", "").lower() in ("python", "py", "pure"):
    from . import _pykern as _impl
else:
    try:
        from . import _ckern as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _pykern as _impl

BACKEND = _impl.BACKEND_NAME
crc32c = _impl.crc32c
search_layer0 = _impl.search_layer0
select_heuristic = _impl.select_heuristic
