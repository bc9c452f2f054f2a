"""Kernel backend selection.

The compiled extension is preferred when it imported cleanly; the numpy
reference is the fallback.  COSMIC_KERNELS=python or COSMIC_KERNELS=compiled
forces a backend (the latter raises if the extension is unavailable), which
the benchmark and the backend-agreement tests use.  Reports echo the active
backend because results are bit-reproducible only within one backend.
"""

from __future__ import annotations

import os

from . import reference

_requested = os.environ.get("COSMIC_KERNELS", "").strip().lower()
if _requested not in ("", "python", "compiled"):
    raise ValueError(
        f"COSMIC_KERNELS must be 'python' or 'compiled', got {_requested!r}"
    )

if _requested == "python":
    _impl = reference
else:
    try:
        from . import _speedups as _impl  # type: ignore[no-redef]
    except ImportError:
        if _requested == "compiled":
            raise
        _impl = reference

BACKEND = "python" if _impl is reference else "compiled"

marginal_logpdf = _impl.marginal_logpdf
marginal_grads = _impl.marginal_grads
conditional_logpdf = _impl.conditional_logpdf
conditional_grads = _impl.conditional_grads
