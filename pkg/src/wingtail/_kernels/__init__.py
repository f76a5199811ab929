"""Hot numerical kernels: compiled when available, pure Python otherwise.

Set ``WINGTAIL_PURE_PYTHON=1`` to force the fallback (used by the benchmark
and by the tests that compare both backends).
"""
import os

from . import _pure

BACKEND = "python"
_impl = _pure

if os.environ.get("WINGTAIL_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _pure

riccati_fixed = _impl.riccati_fixed
riccati_adaptive = _impl.riccati_adaptive
heston_block = _impl.heston_block

__all__ = ["BACKEND", "riccati_fixed", "riccati_adaptive", "heston_block"]
