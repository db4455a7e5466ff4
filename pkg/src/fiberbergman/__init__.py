"""Fiberwise Bergman kernels on degenerating families of plane curves."""

__version__ = "0.1.0"

from .errors import FiberBergmanError  # noqa: E402
from .family import CENTRAL, builtin_family, load_family, read_family  # noqa: E402

__all__ = ["CENTRAL", "FiberBergmanError", "builtin_family", "load_family", "read_family", "__version__"]
