"""Nonstandard finite difference (NSFD) integration with automatic dynamic-consistency thresholds."""

from .conservation import ConservationReport, check_dcl, check_gcl, gcl_exact_value
from .equilibria import (
    EquilibriumReport,
    Stability,
    ThresholdReport,
    classify,
    compute_thresholds,
    discrete_jacobian,
    find_equilibria,
    threshold_m_GCL,
    threshold_m_P,
    threshold_m_S,
    threshold_phi_GCL,
    threshold_phi_P,
    threshold_phi_S,
)
from .exceptions import ConvergenceError, HyperbolicityError, NSFDError, NumericalDomainError, UsageError
from .integrators import (
    DenominatorSpec,
    SchemeSpec,
    Trajectory,
    classical_step,
    denominator_value,
    integrate,
    nonstd_euler_step,
    nsfd_step,
)
from .linalg import eigenvalues, jacobian, spectral_abscissa, spectral_radius
from .model import ConservationDecl, DynamicalModel, check_condition_C1, eval_rhs, total_population
from .models import BirthFunction, predator_prey, reproduction_number, single_species, sis_dcl, vaccination

__version__ = "0.1.0"
