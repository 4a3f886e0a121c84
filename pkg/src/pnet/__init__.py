"""pnet: mass-interaction physical network modelling and simulation.

Networks are built from point masses and pairwise interactions, labelled
through a hierarchical path namespace, scripted with a small embedded
command language, and simulated sample-by-sample to audio rate.
"""

from .errors import PnetError
from .kinds import Family, ModuleKind
from .labels import LabelIndex
from .model import Model
from .network import Network
from .picker import eval_picker, parse_picker

__version__ = "1.0.0"

# Heavier layers import on demand so `import pnet` stays light:
#   pnet.engine   compiled simulation (pulls in numba)
#   pnet.io       documents, WAV, signals, app URLs
#   pnet.script   the command language and standard packages
#   pnet.session  the verb API; pnet.service for its transports

__all__ = [
    "Family",
    "LabelIndex",
    "Model",
    "ModuleKind",
    "Network",
    "PnetError",
    "eval_picker",
    "parse_picker",
    "__version__",
]
