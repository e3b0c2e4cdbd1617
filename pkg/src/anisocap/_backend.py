"""Kernel backend chosen at import time.

The compiled extension is used when importable; set ``ANISOCAP_BACKEND``
to ``python`` to force the NumPy/SciPy fallback (``compiled`` makes a
missing extension an import error instead of a silent downgrade).
"""
import os

from . import _fallback

_choice = os.environ.get("ANISOCAP_BACKEND", "auto").strip().lower()
if _choice not in ("auto", "python", "compiled"):
    raise ImportError(f"ANISOCAP_BACKEND must be auto, python or compiled, got {_choice!r}")

impl = _fallback
if _choice != "python":
    try:
        from . import _core as impl  # noqa: F811
    except ImportError:
        if _choice == "compiled":
            raise
        impl = _fallback

NAME = impl.BACKEND_NAME
weight_table_2d = impl.weight_table_2d
cross_sum = impl.cross_sum
absdiff_sum = impl.absdiff_sum
edt_sq = impl.edt_sq
maxflow = impl.maxflow


def implementations():
    """Both implementations keyed by name (compiled only if built)."""
    out = {"python": _fallback}
    try:
        from . import _core
        out["compiled"] = _core
    except ImportError:
        pass
    return out
