"""Backend selection for the Monte Carlo tree walker.

The compiled extension is used when it was built; otherwise, or when
``THETASIM_PURE_PYTHON`` is set to a non-empty value, the numpy fallback
runs instead.  Both produce identical results.
"""

import os

from . import _kernel_py

BACKEND = "python"
walk_tree = _kernel_py.walk_tree

if not os.environ.get("THETASIM_PURE_PYTHON"):
    try:
        from ._kernel import walk_tree  # noqa: F811
    except ImportError:
        pass
    else:
        BACKEND = "cython"

python_walk_tree = _kernel_py.walk_tree
