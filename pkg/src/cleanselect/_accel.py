"""Numba on/off switch.

Hot kernels JIT-compile through numba by default; setting the environment
variable CLEANSELECT_NUMBA=0 (or numba being absent) routes every kernel
through its vectorized numpy fallback instead. The flag is read once at
import time.
"""

import os

ENV_FLAG = "CLEANSELECT_NUMBA"

try:
    import numba  # noqa: F401

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False


def _env_wants_numba() -> bool:
    return os.environ.get(ENV_FLAG, "1").strip().lower() not in ("0", "false", "off", "no")


USE_NUMBA = HAVE_NUMBA and _env_wants_numba()
