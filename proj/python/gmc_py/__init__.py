from ._gmc import *  # noqa: F401,F403
from ._gmc import __doc__  # noqa: F401
