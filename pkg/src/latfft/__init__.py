"""Sparse multivariate Fourier reconstruction from random rank-1 lattices.

The library identifies the active frequencies of a high-dimensional sparse
trigonometric polynomial inside an arbitrary candidate set by sampling along
multiple randomly generated rank-1 lattices, recovers the coefficients as
componentwise medians of the per-lattice estimates, and scales to high
dimensions through a dimension-incremental pipeline.  An experiment harness
reproduces the worst-case success-rate and approximation studies at desk
scale.
"""

from ._kernels import BACKEND as kernel_backend
from .errors import CapacityError, DetectionFailure, LatfftError, ParameterError
from .freqset import (
    Box,
    FreqSet,
    expansion,
    full_grid,
    hyperbolic_cross,
    load_freqset,
    project,
    random_subset,
    reduce_mod,
    save_freqset,
)
from .lattice import (
    MultiLatticeConfig,
    Rank1Lattice,
    draw_config,
    draw_config_with_sizes,
    is_prime,
    lattice_nodes,
    load_config,
    next_valid_prime,
    required_L,
    residue,
    save_config,
)
from .dft import dft_forward_normalized
from .polyeval import (
    SamplingOracle,
    SparsePoly,
    bspline_coeff,
    evaluate,
    f10_coeff,
    f10_oracle,
    f10_sq_norm,
    load_poly,
    oracle_from_poly,
    random_poly,
    rel_l2_error,
    sample_on_lattice,
    save_poly,
)
from .detect import (
    DetectionResult,
    ZeroTest,
    detect_and_compute,
    detect_frequencies,
    detect_topk,
    per_lattice_coefficients,
    postprocess_r1l,
)
from .dimincr import SfftParams, SfftResult, choose_params, sfft
from .analysis import (
    ExperimentSpec,
    TrialRecord,
    pfp_pfn_count,
    run_success_experiment,
    sample_budget,
    guaranteed_sample_budget,
    theoretical_failure_bound,
)

__version__ = "0.1.0"
