"""Backend selection for the SGD inner loop.

The compiled extension is preferred when importable; the numpy fallback
implements the identical update sequence. Set DRGRADE_BACKEND=pure (or
fast) to force a choice, e.g. for the benchmark in benchmarks/.
"""

import os

from . import pure

_choice = os.environ.get("DRGRADE_BACKEND", "").lower()

if _choice == "pure":
    _impl = pure
    BACKEND = "pure"
else:
    try:
        from . import _fast as _impl  # type: ignore[attr-defined]

        BACKEND = "fast"
    except ImportError:
        if _choice == "fast":
            raise
        _impl = pure
        BACKEND = "pure"

sgd_epoch = _impl.sgd_epoch
