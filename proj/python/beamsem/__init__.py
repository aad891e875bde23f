"""Python access to the beamsem C++ core."""

from ._beamsem import *  # noqa: F401,F403
from ._beamsem import __doc__  # noqa: F401
