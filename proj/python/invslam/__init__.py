"""Invariant EKF SLAM: plant model, observers, Riccati gains and property checks."""

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401
