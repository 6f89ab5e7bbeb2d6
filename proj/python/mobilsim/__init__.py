"""Multi-lane motorway microsimulation: IDM car following, MOBIL lane
changing, and travel-time parameter sweeps."""

from ._mobilsim import *  # noqa: F401,F403
from ._mobilsim import __doc__  # noqa: F401

__version__ = "0.1.0"
