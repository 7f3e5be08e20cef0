"""anylab: anycast routing, traffic engineering and catchment laboratory."""

try:
    from ._anylab import *  # noqa: F401,F403
except ImportError:  # extension built outside the package directory
    from _anylab import *  # noqa: F401,F403
