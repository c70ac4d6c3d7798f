"""Backend selection for the Dykstra projection kernel.

The compiled Cython kernel is preferred; the pure-numpy fallback has
identical semantics and is selected when the extension is missing or when
``JOLOPT_PURE_PYTHON=1`` is set.  ``BACKEND`` names the active choice.
"""

import os

from . import dykstra_py

if os.environ.get("JOLOPT_PURE_PYTHON", "") not in ("", "0"):
    dykstra_project = dykstra_py.dykstra_project
    BACKEND = "python"
else:
    try:
        from .dykstra_cy import dykstra_project

        BACKEND = "cython"
    except ImportError:
        dykstra_project = dykstra_py.dykstra_project
        BACKEND = "python"

__all__ = ["dykstra_project", "BACKEND", "dykstra_py"]
