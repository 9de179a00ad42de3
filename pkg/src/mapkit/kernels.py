"""Backend selection for the graph kernels.

The compiled module is used when it was built and MAPKIT_PURE_PYTHON is
unset; otherwise the pure-Python fallback is used.  `use()` switches the
backend at runtime (the benchmark relies on this).
"""

import os

from . import _pykernels

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

BACKENDS = {"python": _pykernels}
if _ckernels is not None:
    BACKENDS["cython"] = _ckernels

BACKEND = ""
box = reach = refine = None


def use(name: str) -> None:
    global BACKEND, box, reach, refine
    try:
        mod = BACKENDS[name]
    except KeyError:
        raise ValueError(f"kernel backend {name!r} is not available; have {sorted(BACKENDS)}") from None
    box, reach, refine = mod.box, mod.reach, mod.refine
    BACKEND = name


use("python" if os.environ.get("MAPKIT_PURE_PYTHON") or _ckernels is None else "cython")
