"""Discrete-time self-exciting binary process toolkit."""

from ._dthp import *  # noqa: F401,F403
from ._dthp import __version__  # noqa: F401
