"""Certified s-good submatrices and uniform-norm low-rank approximation."""
__version__ = "0.1.0"

from .core import RandomSource, read_matrix, spectral_norm, uniform_norm, write_matrix
from .gaussian import FactorPair, RankKFactor, approx_error, factor_via_svd, gaussian_rank_k
from .goodness import GoodnessCertificate, certified_s, linf_regression, mutual_incoherence, opt_certificate
from .greedy import GreedyState, run_derandomized
from .hadamard import build_hadamard, hadamard_certificate
from .norm import NormBounds, hadamard_rank_lb, identity_rank_lb, norm_bounds
from .potential import BetaSchedule, PotentialParams, beta_at, v_beta, v_beta_grad
from .sampler import RowEnsemble, build_ensemble, sample_sketch

__all__ = [
    "BetaSchedule",
    "FactorPair",
    "GoodnessCertificate",
    "GreedyState",
    "NormBounds",
    "PotentialParams",
    "RandomSource",
    "RankKFactor",
    "RowEnsemble",
    "approx_error",
    "beta_at",
    "build_ensemble",
    "build_hadamard",
    "certified_s",
    "factor_via_svd",
    "gaussian_rank_k",
    "hadamard_certificate",
    "hadamard_rank_lb",
    "identity_rank_lb",
    "linf_regression",
    "mutual_incoherence",
    "norm_bounds",
    "opt_certificate",
    "read_matrix",
    "run_derandomized",
    "sample_sketch",
    "spectral_norm",
    "uniform_norm",
    "v_beta",
    "v_beta_grad",
    "write_matrix",
]
