"""Branches of T-periodic solutions of periodically perturbed coupled delay
differential equations: integration, averaged fields, Brouwer degree, the
discretized translation-operator index, the sigma/Lienard reduction of
sunflower-like equations, and branch continuation."""

from .continuation import Branch, BranchPoint, ContinuationConfig, branch_to_pairs, continue_branch
from .degree import DegreeReport, degree_1d, degree_2d_winding, degree_auto, degree_nd_jacobian
from .fields import FieldHandle, average_f, make_wf, nu_field, v_lambda_field
from .integrator import Trajectory, flow_averaged, flow_unperturbed, integrate
from .lienard import (
    ScalarDelayProblem,
    SigmaResult,
    lienard_reduce,
    lienard_residual,
    sigma_transform,
    verify_sigma,
    wbar,
)
from .poincare import (
    FixedPointRecord,
    TranslationConfig,
    find_fixed_points,
    translate,
    verify_index_identity,
)
from .problem import (
    Box,
    CoupledProblem,
    History,
    PeriodicFn1D,
    average_scalar,
    normalize_delay,
)

__version__ = "0.1.0"

__all__ = [
    "Box",
    "Branch",
    "BranchPoint",
    "ContinuationConfig",
    "CoupledProblem",
    "DegreeReport",
    "FieldHandle",
    "FixedPointRecord",
    "History",
    "PeriodicFn1D",
    "ScalarDelayProblem",
    "SigmaResult",
    "Trajectory",
    "TranslationConfig",
    "average_f",
    "average_scalar",
    "branch_to_pairs",
    "continue_branch",
    "degree_1d",
    "degree_2d_winding",
    "degree_auto",
    "degree_nd_jacobian",
    "find_fixed_points",
    "flow_averaged",
    "flow_unperturbed",
    "integrate",
    "lienard_reduce",
    "lienard_residual",
    "make_wf",
    "normalize_delay",
    "nu_field",
    "sigma_transform",
    "translate",
    "v_lambda_field",
    "verify_index_identity",
    "verify_sigma",
    "wbar",
]
