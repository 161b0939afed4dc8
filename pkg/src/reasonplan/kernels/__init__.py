"""Raster kernel selection: compiled extension when available, numpy fallback.

REASONPLAN_KERNEL=python|compiled forces a backend; `compiled` raises if the
extension was not built. Default (`auto`) prefers the extension.
"""

from __future__ import annotations

import os

from . import raster_py

_choice = os.environ.get("REASONPLAN_KERNEL", "auto")

if _choice not in ("auto", "python", "compiled"):
    raise ValueError(f"REASONPLAN_KERNEL must be auto|python|compiled, got {_choice!r}")

if _choice == "python":
    render_view = raster_py.render_view
    BACKEND = "python"
else:
    try:
        from . import _raster

        render_view = _raster.render_view
        BACKEND = "compiled"
    except ImportError:
        if _choice == "compiled":
            raise ImportError(
                "REASONPLAN_KERNEL=compiled but the extension is not built; "
                "run `pip install -e . --no-build-isolation`"
            ) from None
        render_view = raster_py.render_view
        BACKEND = "python"


def available_backends() -> dict:
    """Name -> render_view for every importable backend (used by the benchmark)."""
    backends = {"python": raster_py.render_view}
    try:
        from . import _raster

        backends["compiled"] = _raster.render_view
    except ImportError:
        pass
    return backends
