from .logging import setup_logging
from .exceptions import *  # noqa: F401,F403
from .exceptions import __all__ as _exception_names

__all__ = ["setup_logging", *_exception_names]
