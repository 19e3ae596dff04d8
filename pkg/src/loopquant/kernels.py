"""Kernel backend selection.

The compiled ``_kernels`` extension is used when it was built; otherwise the
pure-Python twin is used.  Set ``LOOPQUANT_PURE=1`` to force the fallback.
"""

import os

if os.environ.get("LOOPQUANT_PURE"):
    from . import _kernels_py as _impl
else:
    try:
        from . import _kernels as _impl
    except ImportError:
        from . import _kernels_py as _impl

BACKEND = "compiled" if _impl.__name__.endswith("._kernels") else "python"

NO_CAP = _impl.NO_CAP
mul_terms = _impl.mul_terms
derive_terms = _impl.derive_terms
add_into = _impl.add_into
