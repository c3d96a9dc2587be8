"""Echo dynamics of deformed Wigner matrices."""

import os
import platform

if platform.machine() in ("x86_64", "AMD64"):
    os.environ.setdefault("OPENBLAS_CORETYPE", "Haswell")

from ._echodyn import *  # noqa: E402,F401,F403
from ._echodyn import EchodynError  # noqa: E402,F401

__all__ = [name for name in dir() if not name.startswith("_")]
