"""Transform-domain message passing for linear-Gaussian estimation.

The package solves y = A x + n three ways (per-element stepsizes, scalar
stepsizes, and iteration on the unitarily transformed model), and certifies
the transform-domain variant's convergence from the spectrum of its frozen
iteration matrix.
"""

from .denoisers import (
    BernoulliGaussianPrior,
    DenoiserOutput,
    GaussianPrior,
    bg_denoise,
    denoiser_variance_modes,
    gaussian_denoise,
)
from .ensembles import ENSEMBLE_KINDS, EnsembleSpec, generate_matrix, stream, synthesize_instance
from .matrixio import load_matrix, load_vector, save_matrix, save_vector
from .model import (
    Factorization,
    FactorizationError,
    LinearModel,
    TransformedModel,
    circulant_factorize,
    scaled_gram_diagonal,
    svd_factorize,
    unitary_transform,
)
from .solvers import (
    ALGORITHMS,
    SolverState,
    StepScratch,
    Trace,
    initial_state,
    lmmse_solve,
    run,
    scalar_amp_step,
    ut_amp_step,
    vector_amp_step,
)
from .spectral import (
    ConvergenceCertificate,
    SpectralCoefficients,
    UnsupportedPriorError,
    VarianceFixedPoint,
    certify,
    closed_form_eigenvalues,
    eigenvalue_discrepancy,
    numeric_iteration_matrix,
    spectral_coefficients,
    variance_fixed_point,
)

__version__ = "0.1.0"

__all__ = [
    "ALGORITHMS",
    "ENSEMBLE_KINDS",
    "BernoulliGaussianPrior",
    "ConvergenceCertificate",
    "DenoiserOutput",
    "EnsembleSpec",
    "Factorization",
    "FactorizationError",
    "GaussianPrior",
    "LinearModel",
    "SolverState",
    "SpectralCoefficients",
    "StepScratch",
    "Trace",
    "TransformedModel",
    "UnsupportedPriorError",
    "VarianceFixedPoint",
    "bg_denoise",
    "certify",
    "circulant_factorize",
    "closed_form_eigenvalues",
    "denoiser_variance_modes",
    "eigenvalue_discrepancy",
    "gaussian_denoise",
    "generate_matrix",
    "initial_state",
    "lmmse_solve",
    "load_matrix",
    "load_vector",
    "numeric_iteration_matrix",
    "run",
    "save_matrix",
    "save_vector",
    "scalar_amp_step",
    "scaled_gram_diagonal",
    "spectral_coefficients",
    "stream",
    "svd_factorize",
    "synthesize_instance",
    "ut_amp_step",
    "unitary_transform",
    "variance_fixed_point",
    "vector_amp_step",
]
