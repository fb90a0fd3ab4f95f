"""Selection between the compiled and pure-Python step kernels.

The compiled extension is preferred when importable; set CTLQR_BACKEND to
"cython" or "python" to force one, or pass backend= to simulate_segment.
"""

from __future__ import annotations

import os

from . import _kernel_py

try:
    from . import _kernel as _kernel_cy
except ImportError:  # extension not built; pure-Python install
    _kernel_cy = None

__all__ = ["available_backends", "get_backend", "default_backend_name"]

_BACKENDS = {"python": _kernel_py}
if _kernel_cy is not None:
    _BACKENDS["cython"] = _kernel_cy


def available_backends() -> tuple[str, ...]:
    return tuple(sorted(_BACKENDS))


def default_backend_name() -> str:
    env = os.environ.get("CTLQR_BACKEND", "auto").strip().lower()
    if env in _BACKENDS:
        return env
    if env not in ("", "auto"):
        raise ValueError(
            f"CTLQR_BACKEND={env!r} not available; choices: {available_backends()} or 'auto'"
        )
    return "cython" if "cython" in _BACKENDS else "python"


def get_backend(name: str | None = None):
    """Return (name, kernel module). name=None resolves the default."""
    if name is None or name == "auto":
        name = default_backend_name()
    try:
        return name, _BACKENDS[name]
    except KeyError:
        raise ValueError(
            f"unknown backend {name!r}; choices: {available_backends()}"
        ) from None
