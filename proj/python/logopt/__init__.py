"""Growth-optimal portfolio analysis for jump-diffusion market models.

Thin python surface over the compiled core: load a model from its json
description, solve for the optimal fraction, and verify the dual identities
by simulation.
"""

try:
    from ._logopt import *  # noqa: F401,F403  (installed wheel layout)
    from ._logopt import __doc__ as _core_doc  # noqa: F401
except ImportError:  # in-tree build: module sits next to the package on sys.path
    from _logopt import *  # noqa: F401,F403
