"""Inverse heat-sink solver bindings.

The compiled extension carries the full API; this package re-exports it.
"""

from _pinnhs import *  # noqa: F401,F403
from _pinnhs import __version__  # noqa: F401
