"""Positive-semidefinite, low-rank covariance function estimation for
sparsely observed functional data."""

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401
