"""Zernike-polynomial wavelets and multiresolution analysis on the unit disk."""

from .zernike import *  # noqa: F401,F403
from .kernel import *  # noqa: F401,F403
from .sampling import *  # noqa: F401,F403
from .scaling import *  # noqa: F401,F403
from .wavelets import *  # noqa: F401,F403
from .mra import *  # noqa: F401,F403
from .fitting import *  # noqa: F401,F403
from . import fitting, kernel, mra, sampling, scaling, wavelets, zernike  # noqa: F401

__version__ = "0.1.0"
