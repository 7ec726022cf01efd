"""Near-representations of preference models (C++ core)."""

from ._nearrep import *  # noqa: F401,F403
from ._nearrep import __doc__  # noqa: F401
