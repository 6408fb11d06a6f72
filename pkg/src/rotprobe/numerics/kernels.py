"""Backend selection for the LSTM recurrence.

The compiled extension is used when it imports; otherwise the numpy fallback.
Set ``ROTPROBE_KERNEL=python`` to force the fallback.
"""

import logging
import os

from . import _lstm_python

logger = logging.getLogger(__name__)

try:
    from . import _lstm_ext

    HAS_EXTENSION = True
except ImportError:  # pragma: no cover - depends on the build
    _lstm_ext = None
    HAS_EXTENSION = False

BACKENDS = {"python": _lstm_python}
if HAS_EXTENSION:
    BACKENDS["compiled"] = _lstm_ext


def _default() -> str:
    wanted = os.environ.get("ROTPROBE_KERNEL", "").strip().lower()
    if wanted in BACKENDS:
        return wanted
    if wanted and wanted not in BACKENDS:
        logger.warning("kernel %r unavailable, using %s", wanted, "compiled" if HAS_EXTENSION else "python")
    return "compiled" if HAS_EXTENSION else "python"


_active = _default()


def backend_name() -> str:
    return _active


def set_backend(name: str) -> None:
    global _active
    if name not in BACKENDS:
        raise ValueError(f"unknown or unavailable kernel backend {name!r}; have {sorted(BACKENDS)}")
    _active = name


def get_backend(name: str | None = None):
    return BACKENDS[name or _active]
