"""Numerics for 2-D Riemannian metrics as complex-analytic data.

Submodules: surface (models, charts, regions), isothermal (conformal
coordinates), bergman (kernels of square-integrable holomorphic
differentials), spectral (eigenvalues and isoperimetric constants),
heatgreen (heat kernels, Green functions, capacities), convergence
(kernel-convergence experiments), cli (config-driven runner).
"""

from .bergman import (
    BergmanSpace,
    KernelValue,
    build_bergman_space,
    disc_quadrature,
    kernel_diag,
    kernel_offdiag,
    normalized_magnitude,
    space_from_quadrature,
)
from .convergence import (
    ConvergenceReport,
    CutoffProfile,
    blended_metric_experiment,
    counterexample_experiment,
    exhaustion_experiment,
    log_rate_experiment,
    perturbation_experiment,
)
from .errors import (
    ConfigError,
    DomainError,
    MetricError,
    RklError,
    SolverError,
)
from .heatgreen import (
    GreenField,
    HeatField,
    RegularityFit,
    capacity,
    capacity_green_sandwich,
    capacity_lower_step,
    gaussian_offdiag_check,
    green_field,
    harnack_submean_measure,
    heat_field,
    ondiag_fit,
)
from .isothermal import (
    IsothermalPatch,
    patch_sequence_convergence,
    solve_isothermal,
)
from .spectral import (
    SpectralReport,
    inequality_audit,
    isoperimetric_sweep,
    lambda1_closed_meanzero,
    lambda1_dbar_identity_check,
    lambda1_dirichlet,
)
from .surface import (
    ConformalDisc,
    EuclideanPlane,
    FlatTorus,
    GridChart,
    HyperbolicDisc,
    Region,
    Revolution,
    Sphere,
    chart_from_callable,
    chart_from_model,
    curvature_field,
    geodesic_ball,
    load_chart,
    measure,
    save_chart,
)

__version__ = "0.1.0"
