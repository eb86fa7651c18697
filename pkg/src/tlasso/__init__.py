"""Recovery of structured signals and structured corruptions from non-linear
Gaussian measurements by constrained least squares, with the geometric
quantities that govern its sample complexity."""

__version__ = "0.1.0"

from .errors import (InvalidLinkError, InvalidSpecError, NotSubGaussianError,
                     NumericalFailureError, TLassoError, UnboundedSetError)
from .links import LinkFunction, NonlinearityParams, apply_link, estimate_psi, link_params, parse_link
from .model import InstanceSpec, ProblemInstance, generate_instance, load_instance, residual, save_instance
from .sets import ConstraintSet, contains, parse_set, project
from .solver import SolveOptions, SolveResult, joint_error, lipschitz_estimate, solve_tlasso
from .geometry import (ConeSample, WidthEstimate, descent_cone_width_mc, gaussian_complexity_mc,
                       gaussian_width_mc, local_gaussian_width_mc, rsv_check,
                       sample_cone_directions, translated_local_width_mc)
from .experiments import (SweepConfig, SweepRow, phase_diagram, run_sweep, scaling_fit, t_sweep)
