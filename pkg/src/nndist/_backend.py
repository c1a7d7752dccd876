"""Kernel backend selection.

The environment variable ``NNDIST_BACKEND`` picks the hot-kernel
implementation:

* ``auto`` (default): numba when importable, numpy otherwise;
* ``numba``: require the compiled kernels, fail loudly if unavailable;
* ``numpy``: force the pure-numpy reference path.

The flag selects an implementation, not behaviour: both paths realise the
same algorithms, and every experiment input still flows through explicit
flags and configs.
"""

from __future__ import annotations

import os

from .errors import ValidationError

ENV_VAR = "NNDIST_BACKEND"


def _select():
    choice = os.environ.get(ENV_VAR, "auto").strip().lower()
    if choice not in ("auto", "numba", "numpy"):
        raise ValidationError(f"{ENV_VAR} must be auto, numba or numpy, got {choice!r}")
    if choice in ("auto", "numba"):
        try:
            from . import _kernels_numba as impl

            return impl, "numba"
        except ImportError:
            if choice == "numba":
                raise
    from . import _kernels_numpy as impl

    return impl, "numpy"


KERNELS, BACKEND_NAME = _select()


def backend_name() -> str:
    return BACKEND_NAME
