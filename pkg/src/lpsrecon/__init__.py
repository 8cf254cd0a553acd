"""Low-rank plus sparse reconstruction of dynamic volumes from undersampled k-space."""

from .core import (
    Decomposition,
    DynamicVolume,
    Prior,
    SolverConfig,
    SupportSet,
    relative_change,
    soft_threshold,
    soft_threshold_matrix,
    soft_threshold_restricted,
)
from .io import (
    BadMagicError,
    HeaderError,
    PayloadError,
    VolumeFileError,
    load_mask,
    load_volume,
    save_mask,
    save_volume,
)
from .operators import (
    KSpaceData,
    SamplingMask,
    SpectralDecomposition,
    acquire,
    acquire_adjoint,
    apply_sigma_prior,
    extract_support,
    make_mask,
    sv_threshold,
    svd,
)
from .harness import (
    ExperimentSpec,
    SolverOptions,
    SweepRow,
    build_solver_config,
    parse_config,
    run_sweep,
)
from .phantom import PhantomSequence, PhantomSpec, default_spec, generate, psnr
from .solvers import (
    FrameSolveError,
    SolveResult,
    default_config,
    prior_from_result,
    solve_ls,
    solve_priori_ls,
    solve_sequence,
)
from .wavelets import WAVELET_LEVELS, wavelet_forward, wavelet_inverse

__version__ = "0.1.0"

__all__ = [
    "Decomposition",
    "DynamicVolume",
    "Prior",
    "SolverConfig",
    "SupportSet",
    "relative_change",
    "soft_threshold",
    "soft_threshold_matrix",
    "soft_threshold_restricted",
    "BadMagicError",
    "HeaderError",
    "PayloadError",
    "VolumeFileError",
    "load_mask",
    "load_volume",
    "save_mask",
    "save_volume",
    "KSpaceData",
    "SamplingMask",
    "SpectralDecomposition",
    "acquire",
    "acquire_adjoint",
    "apply_sigma_prior",
    "extract_support",
    "make_mask",
    "sv_threshold",
    "svd",
    "ExperimentSpec",
    "SolverOptions",
    "SweepRow",
    "build_solver_config",
    "parse_config",
    "run_sweep",
    "PhantomSequence",
    "PhantomSpec",
    "default_spec",
    "generate",
    "psnr",
    "FrameSolveError",
    "SolveResult",
    "default_config",
    "prior_from_result",
    "solve_ls",
    "solve_priori_ls",
    "solve_sequence",
    "WAVELET_LEVELS",
    "wavelet_forward",
    "wavelet_inverse",
]
