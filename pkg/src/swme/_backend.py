"""Pick the kernel backend. Set SWME_DISABLE_NUMBA=1 to force pure numpy."""
import os


def _numba_wanted():
    return os.environ.get("SWME_DISABLE_NUMBA", "").strip().lower() not in ("1", "true", "yes", "on")


# the bundled TBB is too old for numba; workqueue is always available
os.environ.setdefault("NUMBA_THREADING_LAYER", "workqueue")

try:
    import numba  # noqa: F401
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and _numba_wanted()


def backend_name():
    return "numba" if USE_NUMBA else "numpy"
