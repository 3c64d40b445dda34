"""Numerical laboratory for the deformed Hermitian-Yang-Mills and J equations on flat tori."""

from ._core import *  # noqa: F401,F403
from ._core import __doc__  # noqa: F401
