"""Measurement and spectral operators.

The acquisition operator undersamples the centered 2D spatial-frequency
plane of each slice independently, with one shared mask per volume. The
Fourier transform uses the unitary convention throughout, so the operator
has orthonormal rows and its adjoint acts as the inverse on the sampled
subspace.

Mask patterns are indexed on the *centered* spectrum: the DC coefficient
sits at (n_x // 2, n_y // 2), the geometric center of the grid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DynamicVolume, SupportSet

__all__ = [
    "SamplingMask",
    "KSpaceData",
    "SpectralDecomposition",
    "make_mask",
    "acquire",
    "acquire_adjoint",
    "svd",
    "sv_threshold",
    "apply_sigma_prior",
    "extract_support",
]


@dataclass
class SamplingMask:
    """Boolean frequency-sampling pattern over an (n_x, n_y) grid."""

    pattern: np.ndarray

    def __post_init__(self):
        pat = np.asarray(self.pattern)
        if pat.dtype != bool:
            raise ValueError(f"mask pattern must be boolean, got dtype {pat.dtype}")
        if pat.ndim != 2:
            raise ValueError(f"mask pattern must be 2-D, got ndim {pat.ndim}")
        if not pat.any():
            raise ValueError("mask must sample at least one frequency")
        self.pattern = pat

    @property
    def m(self) -> int:
        """Number of sampled frequencies."""
        return int(self.pattern.sum())

    @property
    def rate(self) -> float:
        """Fraction of the grid that is sampled."""
        return self.m / self.pattern.size


@dataclass
class KSpaceData:
    """Undersampled frequency-domain measurements of one volume.

    ``samples`` is m x n_z: column z holds the sampled coefficients of
    slice z, in row-major order of the mask's True positions.
    """

    samples: np.ndarray
    mask: SamplingMask
    dims: tuple[int, int, int]

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.complex128)
        n_x, n_y, n_z = self.dims
        if self.samples.ndim != 2:
            raise ValueError("samples must be a 2-D matrix")
        if self.mask.pattern.shape != (n_x, n_y):
            raise ValueError(
                f"mask grid {self.mask.pattern.shape} inconsistent with dims {self.dims}"
            )
        if self.samples.shape != (self.mask.m, n_z):
            raise ValueError(
                f"samples shape {self.samples.shape} inconsistent with "
                f"m={self.mask.m}, n_z={n_z}"
            )
        if not np.isfinite(self.samples).all():
            raise ValueError("k-space samples contain non-finite entries")


@dataclass
class SpectralDecomposition:
    """Thin SVD carrier: M = U @ diag(sigma) @ V^H."""

    U: np.ndarray
    sigma: np.ndarray
    V: np.ndarray

    def __post_init__(self):
        self.sigma = np.asarray(self.sigma, dtype=np.float64)
        if self.sigma.ndim != 1:
            raise ValueError("sigma must be a 1-D vector")
        if self.sigma.size and self.sigma.min() < 0:
            raise ValueError("singular values must be non-negative")
        if self.sigma.size > 1 and (np.diff(self.sigma) > 0).any():
            raise ValueError("singular values must be sorted descending")

    def compose(self) -> np.ndarray:
        """Rebuild U @ diag(sigma) @ V^H."""
        return (self.U * self.sigma) @ self.V.conj().T


def make_mask(
    n_x: int,
    n_y: int,
    rate: float,
    density_falloff: float = 2.0,
    seed: int = 0,
) -> SamplingMask:
    """Variable-density sampling mask with denser sampling near the center.

    Selects exactly round(rate * n_x * n_y) grid points, weighting the
    selection probability by (1 + d/d0)^(-density_falloff) where d is the
    distance from the grid center and d0 is one eighth of the grid
    diagonal. The center point (DC) is always included. Deterministic for
    a fixed seed.
    """
    if min(n_x, n_y) < 1:
        raise ValueError(f"grid dims must be positive, got ({n_x}, {n_y})")
    if not 0 < rate <= 1:
        raise ValueError(f"rate must be in (0, 1], got {rate}")
    if not density_falloff > 0:
        raise ValueError(f"density_falloff must be > 0, got {density_falloff}")
    total = n_x * n_y
    m = int(round(rate * total))
    if m < 1:
        raise ValueError(f"rate {rate} selects no samples on a {n_x}x{n_y} grid")
    if m >= total:
        return SamplingMask(np.ones((n_x, n_y), dtype=bool))

    cx, cy = n_x // 2, n_y // 2
    ix, iy = np.meshgrid(np.arange(n_x), np.arange(n_y), indexing="ij")
    dist = np.hypot(ix - cx, iy - cy)
    d0 = np.hypot(n_x, n_y) / 8.0
    weight = (1.0 + dist / d0) ** (-density_falloff)

    # Weighted sampling without replacement: smallest exponential keys win.
    rng = np.random.default_rng(seed)
    keys = rng.exponential(size=total).reshape(n_x, n_y) / weight
    keys[cx, cy] = -1.0  # center always sampled
    chosen = np.argsort(keys, axis=None, kind="stable")[:m]
    pattern = np.zeros(total, dtype=bool)
    pattern[chosen] = True
    return SamplingMask(pattern.reshape(n_x, n_y))


def _to_slices(data: np.ndarray, dims: tuple[int, int, int]) -> np.ndarray:
    n_x, n_y, n_z = dims
    return data.T.reshape(n_z, n_x, n_y)


def _from_slices(slices: np.ndarray) -> np.ndarray:
    n_z = slices.shape[0]
    return slices.reshape(n_z, -1).T


def _forward_samples(data: np.ndarray, dims: tuple[int, int, int], pattern: np.ndarray) -> np.ndarray:
    spectra = np.fft.fftshift(
        np.fft.fft2(_to_slices(data, dims), axes=(1, 2), norm="ortho"), axes=(1, 2)
    )
    return spectra[:, pattern].T


def _adjoint_matrix(samples: np.ndarray, dims: tuple[int, int, int], pattern: np.ndarray) -> np.ndarray:
    n_x, n_y, n_z = dims
    spectra = np.zeros((n_z, n_x, n_y), dtype=np.complex128)
    spectra[:, pattern] = samples.T
    slices = np.fft.ifft2(np.fft.ifftshift(spectra, axes=(1, 2)), axes=(1, 2), norm="ortho")
    return _from_slices(slices)


def acquire(x: DynamicVolume, mask: SamplingMask) -> KSpaceData:
    """Frame-by-frame k-space undersampling of a volume.

    Each slice is transformed with the unitary 2D DFT, shifted so DC is
    centered, and the mask's True entries are extracted in row-major
    order.
    """
    n_x, n_y, _ = x.dims
    if mask.pattern.shape != (n_x, n_y):
        raise ValueError(
            f"mask grid {mask.pattern.shape} does not match volume dims {x.dims}"
        )
    samples = _forward_samples(x.data, x.dims, mask.pattern)
    return KSpaceData(samples, mask, x.dims)


def acquire_adjoint(y: KSpaceData) -> DynamicVolume:
    """Adjoint of ``acquire``: zero-fill unsampled frequencies and invert.

    Because the transform is unitary, this is also the least-squares
    zero-filled reconstruction.
    """
    data = _adjoint_matrix(y.samples, y.dims, y.mask.pattern)
    return DynamicVolume(data, y.dims)


def svd(m: np.ndarray) -> SpectralDecomposition:
    """Thin singular value decomposition of a tall matrix.

    LinAlgError from the underlying factorization propagates to the
    caller.
    """
    m = np.asarray(m, dtype=np.complex128)
    if m.ndim != 2:
        raise ValueError("svd expects a 2-D matrix")
    if m.shape[0] < m.shape[1]:
        raise ValueError(f"expected a tall matrix, got shape {m.shape}")
    u, sigma, vh = np.linalg.svd(m, full_matrices=False)
    return SpectralDecomposition(u, sigma, vh.conj().T)


def sv_threshold(m: np.ndarray, lam: float) -> np.ndarray:
    """Soft-threshold the singular values of a matrix (nuclear-norm prox)."""
    if lam < 0:
        raise ValueError(f"threshold must be >= 0, got {lam}")
    dec = svd(m)
    shrunk = np.maximum(dec.sigma - lam, 0.0)
    return (dec.U * shrunk) @ dec.V.conj().T


def apply_sigma_prior(m: np.ndarray, sigma_prev: np.ndarray, lambda_p: float) -> np.ndarray:
    """Step the spectrum of ``m`` toward a previous spectrum.

    With (U, sigma, V) = svd(m), rebuilds the matrix with singular values
    sigma - lambda_p * (sigma - sigma_prev): a gradient step on the
    squared spectral distance to ``sigma_prev``. Values driven below zero
    are clamped (singular values are non-negative by definition). The
    singular vectors of ``m`` itself carry the modified spectrum back to
    matrix form. lambda_p = 0 returns ``m`` unchanged.
    """
    if not 0 <= lambda_p <= 1:
        raise ValueError(f"lambda_p must be in [0, 1], got {lambda_p}")
    m = np.asarray(m, dtype=np.complex128)
    sigma_prev = np.asarray(sigma_prev, dtype=np.float64)
    if sigma_prev.ndim != 1 or sigma_prev.size != m.shape[1]:
        raise ValueError(
            f"sigma_prev length {sigma_prev.shape} does not match matrix columns {m.shape[1]}"
        )
    if lambda_p == 0:
        return m.copy()
    dec = svd(m)
    stepped = dec.sigma - lambda_p * (dec.sigma - sigma_prev)
    stepped = np.maximum(stepped, 0.0)
    return (dec.U * stepped) @ dec.V.conj().T


def extract_support(w: np.ndarray, support_eps: float) -> SupportSet:
    """Indices of coefficients with magnitude above support_eps * max|w|.

    An all-zero matrix has empty support. The relative cutoff makes
    "support" well-defined on continuous-valued iterates.
    """
    if not 0 < support_eps < 1:
        raise ValueError(f"support_eps must be in (0, 1), got {support_eps}")
    w = np.asarray(w)
    if not np.isfinite(w).all():
        raise ValueError("coefficient matrix contains non-finite entries")
    mag = np.abs(w)
    peak = mag.max() if mag.size else 0.0
    if peak == 0.0:
        return SupportSet.empty()
    return SupportSet(np.argwhere(mag > support_eps * peak))
