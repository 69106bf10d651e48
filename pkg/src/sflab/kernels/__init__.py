"""Kernel backend selection.

The hot map evaluations exist twice: a Cython extension (``_speedup``)
and a pure-Python reference (``_ref``).  The compiled backend is used
when the extension was built; ``SFLAB_KERNELS=python`` forces the
reference implementation.  ``benchmarks/bench_kernels.py`` compares the
two.
"""
from __future__ import annotations

import os

from . import _ref

try:
    from . import _speedup  # type: ignore[attr-defined]
except ImportError:  # pragma: no cover - depends on the build
    _speedup = None

_forced = os.environ.get("SFLAB_KERNELS", "").strip().lower()
if _forced == "python":
    _active = _ref
elif _forced in ("", "auto", "compiled"):
    _active = _speedup if _speedup is not None else _ref
else:
    raise RuntimeError(f"unknown SFLAB_KERNELS value: {_forced!r}")

if _forced == "compiled" and _speedup is None:  # pragma: no cover
    raise RuntimeError("compiled kernels requested but the extension is not built")


def backend():
    """Active kernel module."""
    return _active


def backend_name() -> str:
    return _active.BACKEND_NAME


def available_backends() -> dict:
    out = {"python": _ref}
    if _speedup is not None:
        out["compiled"] = _speedup
    return out


def make_packed(*args):
    return _active.make_packed(*args)
