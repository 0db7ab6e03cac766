"""First-passage percolation on Cayley graphs of Z^d: average distances,
asymptotic geodesicity and limit shapes."""
from .errors import *  # noqa: F401,F403
from .lattice import CayleyLattice, graph_distance, word_ball
from .weights import OmegaField, WeightLaw

__version__ = "0.1.0"
