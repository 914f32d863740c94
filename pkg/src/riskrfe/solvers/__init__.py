"""Dual-solver backends: compiled core with a pure-NumPy fallback.

The compiled extension is preferred when present; set RISK_RFE_BACKEND to
"python" or "compiled" to force a choice. ``BACKEND`` names the one in use.
"""

from __future__ import annotations

import os

from . import _smo_py

_requested = os.environ.get("RISK_RFE_BACKEND", "").strip().lower()
if _requested not in ("", "python", "compiled"):
    raise ImportError(f"RISK_RFE_BACKEND must be 'python' or 'compiled', got {_requested!r}")

_impl = None
if _requested in ("", "compiled"):
    try:
        from . import _smo_cy as _impl  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        if _requested == "compiled":
            raise ImportError(
                "RISK_RFE_BACKEND=compiled but the riskrfe.solvers._smo_cy "
                "extension is not built"
            ) from None
if _impl is None:
    _impl = _smo_py
    BACKEND = "python"

smo_solve = _impl.smo_solve
box_solve = _impl.box_solve


def available_backends() -> dict:
    """Importable backend modules keyed by name (for tests and benchmarks)."""
    out = {"python": _smo_py}
    try:
        from . import _smo_cy

        out["compiled"] = _smo_cy
    except ImportError:
        pass
    return out
