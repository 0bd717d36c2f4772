"""Sparse phase retrieval by hard thresholding pursuit with Gauss-Newton refinement.

Recover an ``s``-sparse ``x`` (up to a global phase) from intensities
``y_j = |<a_j, x>|**2``::

    from sparsepr import SolverConfig, gen_sparse_signal, measure, sample_ensemble
    from sparsepr import solve, spectral_init

    x = gen_sparse_signal(1000, 10, seed=1)
    A = sample_ensemble("complex_gaussian", 800, 1000, seed=2)
    y = measure(A, x)
    z0 = spectral_init(A, y, 10).z0
    result = solve(A, y, SolverConfig(s=10), z0, truth=x)
"""

from .errors import InitializationError, ParameterError, SingularSystemError
from .initialization import InitReport, perturbed_oracle_init, spectral_init
from .numerics import dist, hard_threshold, psnr, relative_error
from .objective import gn_step, gradient, jacobian, loss, residual, wirtinger_gradient
from .sensing import (
    DenseEnsemble,
    Measurements,
    PartialDFT,
    SparseSignal,
    add_noise,
    gen_sparse_signal,
    measure,
    sample_ensemble,
)
from .solver import SolveError, SolveResult, SolverConfig, solve, solve_resampled
from .wavelet import WaveletSpec, haar_forward_1d, haar_forward_2d, haar_inverse_1d, haar_inverse_2d

__version__ = "0.1.0"
