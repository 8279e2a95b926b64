"""Photon-counting receiver model.

Thin re-export of the compiled ``_core`` extension. Invalid arguments raise
``ValueError``; an analytic approximation that breaks down raises
``ApproximationError`` whose ``flag`` attribute names the failed condition.
"""

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401
