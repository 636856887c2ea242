"""Multi-HAP wireless-powered MEC: simulator, trainers, exact solver."""

try:
    from ._core import *  # noqa: F401,F403
    from . import _core as _core  # noqa: F401
except ImportError:
    # Build-tree layout: the extension sits next to the package on sys.path.
    import _core  # noqa: F401
    from _core import *  # noqa: F401,F403

__all__ = [name for name in dir(_core) if not name.startswith("_")]
__version__ = getattr(_core, "__version__", "dev")
