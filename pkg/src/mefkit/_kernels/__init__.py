"""Kernel backend selection.

The compiled extension is preferred when importable; the pure-Python reference
implementation is the fallback.  Set ``MEFKIT_BACKEND=python`` to force the
fallback (used by the parity tests and the backend benchmark).
"""
from __future__ import annotations

import os

from . import pyref

_forced = os.environ.get("MEFKIT_BACKEND", "").lower()

if _forced == "python":
    impl = pyref
    BACKEND = "python"
else:
    try:
        from . import _native as impl  # type: ignore[no-redef]

        BACKEND = "native"
    except ImportError:
        if _forced == "native":
            raise
        impl = pyref
        BACKEND = "python"

OPTIMAL = pyref.OPTIMAL
UNBOUNDED = pyref.UNBOUNDED
ITER_LIMIT = pyref.ITER_LIMIT
SINGULAR = pyref.SINGULAR
AT_LOWER = pyref.AT_LOWER
AT_UPPER = pyref.AT_UPPER
BASIC = pyref.BASIC
FREE = pyref.FREE
