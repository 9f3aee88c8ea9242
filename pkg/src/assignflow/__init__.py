"""Assignment-flow labeling on graphs with certified rounding."""

from .errors import (
    AssignFlowError,
    DataError,
    DomainError,
    InvalidArgument,
    PreconditionError,
    RangeError,
    ResourceLimitError,
    UnsupportedError,
)
from .flow import (
    assignment_rhs,
    representative_rhs,
    sflow_init,
    sflow_rhs,
    similarity_map,
    w_from_s_accumulate,
    w_from_s_path,
)
from .integrator import (
    IntegratorConfig,
    Trajectory,
    certified_round,
    discretization_error_probe,
    euler_step,
    integrate,
)
from .simplex import (
    avg_entropy,
    exp_map,
    inv_exp_map,
    lyapunov_value,
    project_tangent,
    replicator_apply,
    weighted_kl,
)
from .stability import (
    StabilityReport,
    classify,
    convergence_rates,
    eps_est,
    eps_unif,
    in_attraction_polytope,
    is_equilibrium,
    jacobian,
    spectrum_integral,
    spectrum_uniform,
)
from .weights import WeightMatrix

__version__ = "0.1.0"
