"""Compact bilinear pooling: exact and sketched second-order pooling."""

try:
    from ._cbp import *  # noqa: F401,F403
    from ._cbp import __doc__  # noqa: F401
except ImportError:
    # Development layout: the extension sits on PYTHONPATH next to the
    # CMake build tree instead of inside the package.
    from _cbp import *  # noqa: F401,F403
    from _cbp import __doc__  # noqa: F401
