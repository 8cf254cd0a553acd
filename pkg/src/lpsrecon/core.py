"""Shared containers and elementwise proximal operators.

Everything downstream works on Casorati matrices: a complex 3D volume of
shape (n_x, n_y, n_z) stored as an (n_x*n_y) x n_z matrix whose columns are
vectorized slices. Low-rank structure across columns captures inter-slice
correlation; the sparse component captures localized change.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "DynamicVolume",
    "Decomposition",
    "SupportSet",
    "Prior",
    "SolverConfig",
    "soft_threshold",
    "soft_threshold_matrix",
    "soft_threshold_restricted",
    "relative_change",
]


def _as_complex_matrix(data, name: str) -> np.ndarray:
    arr = np.asarray(data, dtype=np.complex128)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be a 2-D matrix, got ndim={arr.ndim}")
    return arr


@dataclass
class DynamicVolume:
    """One complex volume at a single time instant, in Casorati form.

    ``data`` has shape (n_x*n_y, n_z); column z is slice z flattened in
    row-major order. All entries must be finite.
    """

    data: np.ndarray
    dims: tuple[int, int, int]

    def __post_init__(self):
        self.data = _as_complex_matrix(self.data, "data")
        n_x, n_y, n_z = self.dims
        if min(n_x, n_y, n_z) < 1:
            raise ValueError(f"dims must be positive, got {self.dims}")
        if self.data.shape != (n_x * n_y, n_z):
            raise ValueError(
                f"data shape {self.data.shape} inconsistent with dims {self.dims}: "
                f"expected ({n_x * n_y}, {n_z})"
            )
        if not np.isfinite(self.data).all():
            raise ValueError("volume contains non-finite entries")

    def slices(self) -> np.ndarray:
        """Return the volume as an (n_z, n_x, n_y) stack of slices."""
        n_x, n_y, n_z = self.dims
        return self.data.T.reshape(n_z, n_x, n_y)

    @classmethod
    def from_slices(cls, slices: np.ndarray, dims: tuple[int, int, int]) -> "DynamicVolume":
        """Build a volume from an (n_z, n_x, n_y) slice stack."""
        n_x, n_y, n_z = dims
        slices = np.asarray(slices, dtype=np.complex128)
        if slices.shape != (n_z, n_x, n_y):
            raise ValueError(f"slice stack shape {slices.shape} inconsistent with dims {dims}")
        return cls(slices.reshape(n_z, n_x * n_y).T.copy(), dims)

    def norm(self) -> float:
        return float(np.linalg.norm(self.data))


@dataclass
class Decomposition:
    """A low-rank / sparse split of one Casorati matrix.

    The reconstruction estimate is exactly ``L + S`` -- there is no hidden
    residual term.
    """

    L: np.ndarray
    S: np.ndarray

    def __post_init__(self):
        self.L = _as_complex_matrix(self.L, "L")
        self.S = _as_complex_matrix(self.S, "S")
        if self.L.shape != self.S.shape:
            raise ValueError(f"L shape {self.L.shape} != S shape {self.S.shape}")

    def estimate(self) -> np.ndarray:
        """The combined estimate L + S."""
        return self.L + self.S


@dataclass
class SupportSet:
    """A set of (row, col) index pairs into a transform-domain matrix.

    Stored as an (k, 2) int array, lexicographically sorted. Indices must
    be unique and non-negative; upper bounds are checked against the matrix
    the set is applied to.
    """

    indices: np.ndarray

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64)
        if idx.size == 0:
            idx = idx.reshape(0, 2)
        if idx.ndim != 2 or idx.shape[1] != 2:
            raise ValueError(f"indices must be (k, 2), got shape {idx.shape}")
        if idx.size and idx.min() < 0:
            raise ValueError("support indices must be non-negative")
        order = np.lexsort((idx[:, 1], idx[:, 0]))
        idx = idx[order]
        if idx.shape[0] > 1 and (np.diff(idx, axis=0) == 0).all(axis=1).any():
            raise ValueError("support indices must be unique")
        self.indices = idx

    @classmethod
    def empty(cls) -> "SupportSet":
        return cls(np.empty((0, 2), dtype=np.int64))

    @classmethod
    def from_mask(cls, mask: np.ndarray) -> "SupportSet":
        """Support of the True entries of a boolean matrix."""
        return cls(np.argwhere(np.asarray(mask, dtype=bool)))

    def to_mask(self, shape: tuple[int, int]) -> np.ndarray:
        """Boolean membership mask of the given shape.

        Raises ValueError if any index falls outside ``shape``.
        """
        rows, cols = shape
        if len(self) and (self.indices[:, 0].max() >= rows or self.indices[:, 1].max() >= cols):
            raise ValueError(f"support index out of bounds for shape {shape}")
        mask = np.zeros(shape, dtype=bool)
        if len(self):
            mask[self.indices[:, 0], self.indices[:, 1]] = True
        return mask

    def __len__(self) -> int:
        return self.indices.shape[0]


@dataclass
class Prior:
    """Reconstruction knowledge carried over from the previous time instant.

    ``sigma_prev`` is the singular-value vector of the previous low-rank
    component; ``support_prev`` the significant-coefficient support of the
    previous sparse component in the transform domain.
    """

    sigma_prev: np.ndarray
    support_prev: SupportSet

    def __post_init__(self):
        sig = np.asarray(self.sigma_prev, dtype=np.float64)
        if sig.ndim != 1:
            raise ValueError("sigma_prev must be a 1-D vector")
        if not np.isfinite(sig).all():
            raise ValueError("sigma_prev contains non-finite entries")
        if sig.size and sig.min() < 0:
            raise ValueError("sigma_prev must be non-negative")
        if sig.size > 1 and (np.diff(sig) > 0).any():
            raise ValueError("sigma_prev must be sorted descending")
        self.sigma_prev = sig
        if not isinstance(self.support_prev, SupportSet):
            self.support_prev = SupportSet(self.support_prev)


@dataclass
class SolverConfig:
    """Thresholds and stopping rules for the iterative solvers.

    lambda_L scales singular-value shrinkage, lambda_S the transform-domain
    shrinkage, lambda_p in [0, 1] the step toward the prior spectrum (0
    disables the prior step). ``support_eps`` is the relative magnitude
    cutoff used when reading a support off a coefficient matrix.
    """

    lambda_L: float
    lambda_S: float
    lambda_p: float = 0.7
    tol: float = 1e-3
    max_iter: int = 300
    support_eps: float = 0.02

    def __post_init__(self):
        if not self.lambda_L > 0:
            raise ValueError(f"lambda_L must be > 0, got {self.lambda_L}")
        if not self.lambda_S > 0:
            raise ValueError(f"lambda_S must be > 0, got {self.lambda_S}")
        if not 0 <= self.lambda_p <= 1:
            raise ValueError(f"lambda_p must be in [0, 1], got {self.lambda_p}")
        if not self.tol > 0:
            raise ValueError(f"tol must be > 0, got {self.tol}")
        if not (isinstance(self.max_iter, int) and self.max_iter >= 1):
            raise ValueError(f"max_iter must be a positive integer, got {self.max_iter}")
        if not 0 < self.support_eps < 1:
            raise ValueError(f"support_eps must be in (0, 1), got {self.support_eps}")


def soft_threshold(x: complex, lam: float) -> complex:
    """Complex soft-thresholding: shrink |x| by lam, preserve the phase.

    Returns exactly 0 when |x| <= lam (in particular at x = 0, where the
    phase is undefined).
    """
    if lam < 0:
        raise ValueError(f"threshold must be >= 0, got {lam}")
    mag = abs(x)
    if mag <= lam:
        return 0j
    return x * ((mag - lam) / mag)


def soft_threshold_matrix(m: np.ndarray, lam: float) -> np.ndarray:
    """Elementwise complex soft-thresholding of a matrix."""
    if lam < 0:
        raise ValueError(f"threshold must be >= 0, got {lam}")
    m = np.asarray(m, dtype=np.complex128)
    mag = np.abs(m)
    scale = np.zeros_like(mag)
    np.divide(np.maximum(mag - lam, 0.0), mag, out=scale, where=mag > 0)
    return m * scale


def soft_threshold_restricted(m: np.ndarray, lam: float, keep: SupportSet) -> np.ndarray:
    """Soft-threshold every entry except those whose index is in ``keep``.

    Kept entries pass through unchanged; with an empty ``keep`` this is
    exactly ``soft_threshold_matrix``.
    """
    m = np.asarray(m, dtype=np.complex128)
    keep_mask = keep.to_mask(m.shape)
    return _soft_threshold_keep(m, lam, keep_mask)


def _soft_threshold_keep(m: np.ndarray, lam: float, keep_mask: np.ndarray) -> np.ndarray:
    out = soft_threshold_matrix(m, lam)
    out[keep_mask] = m[keep_mask]
    return out


def relative_change(x_new: np.ndarray, x_old: np.ndarray) -> float:
    """Frobenius-relative change ||x_new - x_old||_F / ||x_old||_F.

    When ||x_old||_F = 0 the numerator norm is returned, so the stopping
    rule stays well-defined on an all-zero iterate.
    """
    x_new = np.asarray(x_new)
    x_old = np.asarray(x_old)
    if x_new.shape != x_old.shape:
        raise ValueError(f"shape mismatch: {x_new.shape} vs {x_old.shape}")
    denom = float(np.linalg.norm(x_old))
    num = float(np.linalg.norm(x_new - x_old))
    if denom == 0.0:
        return num
    return num / denom
