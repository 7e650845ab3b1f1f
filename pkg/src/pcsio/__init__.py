"""Singular integral operators with PC coefficients on weighted variable
Lebesgue spaces over logarithmically whirling Carleson curves.

Boundedness and Fredholm decisions, spiralic-horn spectra, the symbol
calculus of the generated algebra, and a finite-section cross-check.
"""

__version__ = "0.1.0"

from .curves import CurveSpec, node_circle, unit_circle, whirl_curve
from .errors import (
    ConvergenceError,
    InputError,
    InsufficientScaleError,
    PcsioError,
    PreconditionError,
    ZeroLimitError,
)
from .fredholm import (
    check_boundedness,
    closed_image,
    essential_spectrum_cloud,
    fredholm_sio,
    indicator_functions,
    local_spectrum,
    luxemburg_norm,
    ap_condition_estimate,
)
from .horns import SpiralicHorn, boundary_curve, classify, membership, sample_region
from .indices import IndexPair, envelope_check, mo_indices, phi_estimate, powerlikeness_indices
from .problem import (
    ExponentSpec,
    PcSymbol,
    ProblemInstance,
    RadialWeightSpec,
    carleson_constant,
    conjugate_exponent,
    jump_exponent,
    point_indices,
    spirality_delta,
    validate_exponent,
)
from .profiles import Indexed, PowerLaw, Sampled
from .sections import cluster_compare, fourier_toeplitz, sigma_min_sweep
from .symbols import fredholm_algebra, horn_bundle, sigma_eval, sigma_generator
