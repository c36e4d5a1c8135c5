"""Confidence-interval accuracy of observed vs expected Fisher information.

Thin python surface over the C++ core: normal/confidence-level numerics, the
three experiment model families, MLE solvers, and the Monte Carlo harness.
"""

try:
    from ._fimci import *  # noqa: F401,F403  (installed package layout)
    from ._fimci import __version__  # noqa: F401
except ImportError:  # in-tree build: extension module on PYTHONPATH
    from _fimci import *  # noqa: F401,F403
    from _fimci import __version__  # noqa: F401
