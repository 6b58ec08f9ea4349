"""Assignment-solver backend selection.

The compiled Cython kernel is preferred when the extension was built;
otherwise the numpy implementation is used. Both produce the identical
permutation for the same cost matrix.
"""

from protosphere._core import _lapjv_py

try:
    from protosphere._core._lapjv import lapjv

    BACKEND = "cython"
except ImportError:  # extension not built
    lapjv = _lapjv_py.lapjv
    BACKEND = "python"


def backends():
    """Mapping of available backend name -> solver callable."""
    found = {"python": _lapjv_py.lapjv}
    if BACKEND == "cython":
        found["cython"] = lapjv
    return found
