"""Multi-bubble solutions of -Delta_a u = |x-q|^{2 alpha} k e^{-t phi_1} e^u on planar domains."""

from .ansatz import assemble, build_problem, make_config
from .discretization import Coefficient, Domain, assemble_operator, build_grid
from .energy import ReducedEnergy, maximize
from .errors import BubbleError, ConfigurationError, DomainError, NumericalError, ResolutionError
from .full_solver import newton_solve

__version__ = "0.1.0"
