"""Iterative low-rank plus sparse solvers and the sequential pipeline.

Both solvers run the same soft-thresholding iteration from the zero-filled
proxy X0 = A^H(y), S0 = 0:

    1. L <- singular-value soft-thresholding of (X - S) with lambda_L
    2. (prior only) step the spectrum of L toward the previous frame's
       spectrum with step lambda_p
    3. S <- inverse transform of the soft-thresholded coefficients of
       (X - L); with a prior, coefficients on the previous frame's support
       are exempt from shrinkage
    4. X <- L + S - A^H(A(L + S) - y)   (data consistency)

and stop once the relative change of X drops below ``tol``. The returned
reconstruction estimate is L + S.

With lambda_p = 0 and an empty prior support, the prior-informed solver
reduces exactly to the baseline one.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import (
    Decomposition,
    Prior,
    SolverConfig,
    _soft_threshold_keep,
    relative_change,
    soft_threshold_matrix,
)
from .operators import (
    KSpaceData,
    _adjoint_matrix,
    _forward_samples,
    acquire_adjoint,
    apply_sigma_prior,
    extract_support,
    sv_threshold,
    svd,
)
from .wavelets import WAVELET_LEVELS, _forward_matrix, _inverse_matrix, wavelet_forward

__all__ = [
    "SolveResult",
    "FrameSolveError",
    "default_config",
    "solve_ls",
    "solve_priori_ls",
    "solve_sequence",
    "prior_from_result",
]


class FrameSolveError(RuntimeError):
    """A per-frame failure inside a sequence reconstruction."""

    def __init__(self, frame_index: int, cause: Exception):
        super().__init__(f"reconstruction failed at frame {frame_index}: {cause}")
        self.frame_index = frame_index


@dataclass
class SolveResult:
    """Outcome of one solve: the (L, S) pair plus convergence bookkeeping.

    ``residual_history`` holds the per-iteration relative change of the
    iterate; ``data_residual`` is the final ||Y - A(L + S)||_F.
    """

    decomposition: Decomposition
    iterations: int
    converged: bool
    residual_history: np.ndarray
    data_residual: float

    def __post_init__(self):
        self.residual_history = np.asarray(self.residual_history, dtype=np.float64)
        if self.residual_history.shape != (self.iterations,):
            raise ValueError("residual_history length must equal the iteration count")

    def estimate(self) -> np.ndarray:
        return self.decomposition.estimate()


def default_config(
    y: KSpaceData,
    lambda_p: float = 0.7,
    tol: float = 1e-3,
    max_iter: int = 300,
    support_eps: float = 0.02,
    lambda_l_scale: float = 0.05,
    lambda_s_scale: float = 0.02,
) -> SolverConfig:
    """Data-scaled thresholds computed once from the zero-filled proxy.

    lambda_L = lambda_l_scale * sigma_max(X0) and
    lambda_S = lambda_s_scale * max|T(X0)| with X0 = A^H(y).
    """
    x0 = acquire_adjoint(y)
    sigma_max = float(np.linalg.svd(x0.data, compute_uv=False)[0])
    coeff_peak = float(np.abs(wavelet_forward(x0)).max())
    if sigma_max == 0.0 or coeff_peak == 0.0:
        raise ValueError("all-zero measurements give no data scale; set thresholds explicitly")
    return SolverConfig(
        lambda_L=lambda_l_scale * sigma_max,
        lambda_S=lambda_s_scale * coeff_peak,
        lambda_p=lambda_p,
        tol=tol,
        max_iter=max_iter,
        support_eps=support_eps,
    )


def _iterate(y: KSpaceData, cfg: SolverConfig, prior: Prior | None) -> SolveResult:
    dims = y.dims
    pattern = y.mask.pattern
    keep_mask = None
    if prior is not None:
        coeff_shape = (dims[0] * dims[1], dims[2])
        keep_mask = prior.support_prev.to_mask(coeff_shape)

    x = _adjoint_matrix(y.samples, dims, pattern)
    s = np.zeros_like(x)
    l = np.zeros_like(x)
    history: list[float] = []
    converged = False

    for it in range(1, cfg.max_iter + 1):
        l = sv_threshold(x - s, cfg.lambda_L)
        if prior is not None:
            l = apply_sigma_prior(l, prior.sigma_prev, cfg.lambda_p)
        coeffs = _forward_matrix(x - l, dims, WAVELET_LEVELS)
        if prior is not None:
            coeffs = _soft_threshold_keep(coeffs, cfg.lambda_S, keep_mask)
        else:
            coeffs = soft_threshold_matrix(coeffs, cfg.lambda_S)
        s = _inverse_matrix(coeffs, dims, WAVELET_LEVELS)
        combined = l + s
        residual = _forward_samples(combined, dims, pattern) - y.samples
        x_new = combined - _adjoint_matrix(residual, dims, pattern)
        if not np.isfinite(x_new).all():
            raise FloatingPointError(f"solver produced a non-finite iterate at iteration {it}")
        change = relative_change(x_new, x)
        history.append(change)
        x = x_new
        if change < cfg.tol:
            converged = True
            break

    data_residual = float(np.linalg.norm(_forward_samples(l + s, dims, pattern) - y.samples))
    return SolveResult(
        decomposition=Decomposition(l, s),
        iterations=len(history),
        converged=converged,
        residual_history=np.array(history),
        data_residual=data_residual,
    )


def solve_ls(y: KSpaceData, cfg: SolverConfig) -> SolveResult:
    """Baseline L+S reconstruction of one volume."""
    return _iterate(y, cfg, prior=None)


def solve_priori_ls(y: KSpaceData, prior: Prior, cfg: SolverConfig) -> SolveResult:
    """Prior-informed L+S reconstruction of one volume.

    The prior's spectrum pulls the low-rank iterate toward the previous
    frame's singular values; coefficients on the prior support are never
    shrunk, so the sparse component is penalized only outside it.
    """
    if prior.sigma_prev.size != y.dims[2]:
        raise ValueError(
            f"prior spectrum length {prior.sigma_prev.size} does not match n_z {y.dims[2]}"
        )
    # Bounds of the prior support are validated against the coefficient
    # matrix shape inside _iterate.
    return _iterate(y, cfg, prior=prior)


def prior_from_result(result: SolveResult, dims: tuple[int, int, int], support_eps: float) -> Prior:
    """Build the next frame's prior from a finished reconstruction."""
    sigma_prev = svd(result.decomposition.L).sigma
    coeffs = _forward_matrix(result.decomposition.S, dims, WAVELET_LEVELS)
    support_prev = extract_support(coeffs, support_eps)
    return Prior(sigma_prev=sigma_prev, support_prev=support_prev)


def solve_sequence(
    frames: Sequence[KSpaceData],
    cfg_first: SolverConfig,
    cfg_rest: SolverConfig,
) -> list[SolveResult]:
    """Reconstruct a time sequence, threading priors frame to frame.

    The first frame is solved with the baseline solver (no prior exists
    yet); every later frame reuses the previous result's spectrum and
    sparse support. A failure at any frame aborts with that frame's
    1-based index.
    """
    if len(frames) == 0:
        raise ValueError("frame list must be nonempty")
    dims = frames[0].dims
    for t, frame in enumerate(frames):
        if frame.dims != dims:
            raise ValueError(f"frame {t + 1} dims {frame.dims} differ from frame 1 dims {dims}")

    results: list[SolveResult] = []
    for t, frame in enumerate(frames):
        try:
            if t == 0:
                results.append(solve_ls(frame, cfg_first))
            else:
                prior = prior_from_result(results[-1], dims, cfg_rest.support_eps)
                results.append(solve_priori_ls(frame, prior, cfg_rest))
        except Exception as exc:  # noqa: BLE001 - abort must carry the frame index
            raise FrameSolveError(t + 1, exc) from exc
    return results
