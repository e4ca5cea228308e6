"""Best-arm identification under global environment shifts.

Thin wrapper over the compiled core: problem instances, the joint OLS
mean/shift estimator, allocation policies (LinLUCB and baselines), the
replicated PICS/EOC experiment runner, and the statistical probes.
"""

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401
