"""Multi-center non-local point interactions in three dimensions."""

__version__ = "0.1.0"

from .criticality import (  # noqa: E402
    EtaLimit,
    dirichlet_special_case,
    gamma_c_bosons,
    gamma_hat_c,
    gamma_hat_extrema,
)
from .errors import (  # noqa: E402
    DomainError,
    FitError,
    IllConditioned,
    MacdonaldOverflow,
    MacdonaldUnderflow,
    MaxExpansionExceeded,
    QuadratureError,
    SingularBoundaryMatrix,
    ZeroRangeError,
)
from .kernels import (  # noqa: E402
    MassModel,
    ThetaKind,
    ThetaProfile,
    a_function,
    b_apply_point,
    delta_lambda_theta,
    g_lambda,
    green_free_kernel,
    green_mass_kernel,
    phi_weight,
    theta_eval,
)
from .limits import (  # noqa: E402
    MergeKind,
    effective_alpha_merge,
    g_shift_norm,
    local_decay_scan,
    merge_scan,
    verify_identity,
)
from .macdonald import MacdonaldOrder, macdonald_k  # noqa: E402
from .manybody import FormEstimate, GaussianCharge, phi_form_estimate  # noqa: E402
from .pointop import (  # noqa: E402
    BoundaryMatrix,
    CenterConfig,
    ResolventOutput,
    boundary_matrix,
    boundary_probe,
    resolvent_apply,
    solve_charges,
)
from .sources import GaussianSource, QuadSpec, ZeroSource, free_resolvent_apply  # noqa: E402
from .spectral import bound_states, eigencurves, lower_bound, scattering_length  # noqa: E402
