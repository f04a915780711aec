"""Entropy control of an open two-qubit system (Python bindings)."""

from ._qentropy import *  # noqa: F401,F403
from ._qentropy import __doc__  # noqa: F401
