"""Approximate roots of random homogeneous Gaussian polynomial systems on the unit sphere."""

from sphere_roots.params import (
    SCHEMA_VERSION,
    CertConfig,
    HDConfig,
    MSSRunConfig,
    PowerIterConfig,
    SolverConfig,
)
from sphere_roots.polysys import (
    GenerationRecord,
    HomogeneousPoly,
    MonomialBasis,
    MultiIndex,
    PolynomialSystem,
    energy,
    energy_gradient,
    energy_hessian,
    evaluate,
    jacobian,
    restricted_hessian,
    sample_system,
    system_from_dict,
    system_to_dict,
    tangent_basis,
)
from sphere_roots.spectral import (
    DegenerateDirectionError,
    find_descent_direction,
    repeated_squaring,
    s_max_sq,
    s_min,
)
from sphere_roots.newton import CertReport, certify, jacobi_svd, newton_iterate, newton_step
from sphere_roots.hessdesc import HDResult, NoNegativeCurvature, hd_run, hd_step, hd_equation_count
from sphere_roots.mss import GridBlock, MSSParams, MSSResult, block_geometry, mss_params, mss_run
from sphere_roots.driver import RunReport, dispatch, regime

__all__ = [
    "SCHEMA_VERSION",
    "CertConfig",
    "HDConfig",
    "MSSRunConfig",
    "PowerIterConfig",
    "SolverConfig",
    "GenerationRecord",
    "HomogeneousPoly",
    "MonomialBasis",
    "MultiIndex",
    "PolynomialSystem",
    "energy",
    "energy_gradient",
    "energy_hessian",
    "evaluate",
    "jacobian",
    "restricted_hessian",
    "sample_system",
    "system_from_dict",
    "system_to_dict",
    "tangent_basis",
    "DegenerateDirectionError",
    "find_descent_direction",
    "repeated_squaring",
    "s_max_sq",
    "s_min",
    "CertReport",
    "certify",
    "jacobi_svd",
    "newton_iterate",
    "newton_step",
    "HDResult",
    "NoNegativeCurvature",
    "hd_run",
    "hd_step",
    "hd_equation_count",
    "GridBlock",
    "MSSParams",
    "MSSResult",
    "block_geometry",
    "mss_params",
    "mss_run",
    "RunReport",
    "dispatch",
    "regime",
]
