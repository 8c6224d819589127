"""Antenna array construction and near-/far-field boundary distances."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractError

__all__ = [
    "ArrayGeometry",
    "RegionBounds",
    "build_upa",
    "build_ula",
    "region_bounds",
    "fraunhofer_square",
]


@dataclass(frozen=True)
class ArrayGeometry:
    """Element positions (meters), wavelength, and per-element gain.

    Builders place arrays in the xy-plane centered at the origin and record
    the grid layout so the aperture size D counts one spacing-sized cell per
    element (a 100 x 50 grid at 0.01 m spacing spans 1 m x 0.5 m).  For
    caller-supplied position lists without grid metadata, D falls back to the
    bounding-box diagonal of the positions.
    """

    positions: np.ndarray  # (M, 3)
    wavelength: float
    element_gain: float = 1.0
    grid_extent: tuple[float, float] | None = None  # (x span, y span), meters

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=float)
        if pos.ndim != 2 or pos.shape[1] != 3 or pos.shape[0] < 1:
            raise ContractError(f"positions must be (M, 3), got {pos.shape}")
        if self.wavelength <= 0:
            raise ContractError("wavelength must be positive")
        if pos.shape[0] > 1:
            d = np.linalg.norm(pos[:, None, :] - pos[None, :, :], axis=-1)
            np.fill_diagonal(d, np.inf)
            if np.any(d == 0):
                raise ContractError("element positions must be pairwise distinct")
        object.__setattr__(self, "positions", pos)

    @property
    def num_elements(self) -> int:
        return self.positions.shape[0]

    @property
    def aperture(self) -> float:
        """Largest array dimension D (the diagonal), meters."""
        if self.grid_extent is not None:
            return float(np.hypot(*self.grid_extent))
        span = self.positions.max(axis=0) - self.positions.min(axis=0)
        return float(np.linalg.norm(span))


@dataclass(frozen=True)
class RegionBounds:
    """Field-region boundary distances for an aperture of size D."""

    d_reactive: float    # 0.62 sqrt(D^3 / lambda)
    d_power: float       # 2 D, inside which power varies noticeably over the array
    d_fraunhofer: float  # 2 D^2 / lambda
    aperture: float      # D


def build_upa(n_x: int, n_y: int, dx: float, dy: float, wavelength: float,
              element_gain: float = 1.0) -> ArrayGeometry:
    """Uniform planar array in the xy-plane, centered at the origin.

    Element (n, m) sits at ((n - (N_x+1)/2) dx, (m - (N_y+1)/2) dy, 0) for
    1-based n, m.  A ULA is the n_y = 1 case.
    """
    if n_x < 1 or n_y < 1:
        raise ContractError("element counts must be >= 1")
    if dx <= 0 or dy <= 0:
        raise ContractError("spacings must be positive")
    xs = (np.arange(1, n_x + 1) - (n_x + 1) / 2) * dx
    ys = (np.arange(1, n_y + 1) - (n_y + 1) / 2) * dy
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    pos = np.stack([X.ravel(), Y.ravel(), np.zeros(n_x * n_y)], axis=1)
    extent = (n_x * dx if n_x > 1 else 0.0, n_y * dy if n_y > 1 else 0.0)
    return ArrayGeometry(pos, wavelength, element_gain, extent)


def build_ula(n: int, spacing: float, wavelength: float,
              element_gain: float = 1.0) -> ArrayGeometry:
    """Uniform linear array along x, centered at the origin."""
    return build_upa(n, 1, spacing, spacing, wavelength, element_gain)


def region_bounds(geom: ArrayGeometry) -> RegionBounds:
    """Reactive, power-variation, and Fraunhofer boundaries of the array.

    For a single element D = 0 and all bounds are 0.  The identities
    d_F = 2 D^2 / lambda, d_B = 2 D and d_F / d_B = D / lambda hold exactly.
    """
    D = geom.aperture
    lam = geom.wavelength
    return RegionBounds(
        d_reactive=0.62 * np.sqrt(D ** 3 / lam),
        d_power=2.0 * D,
        d_fraunhofer=2.0 * D ** 2 / lam,
        aperture=D,
    )


def fraunhofer_square(n: int, spacing: float, wavelength: float) -> float:
    """Fraunhofer distance 4 N^2 Delta^2 / lambda of an N x N square array.

    Equals 2 D^2 / lambda with D = sqrt(2) N Delta, the diagonal of the
    square aperture spanned by N antennas at the given spacing.
    """
    if n < 1:
        raise ContractError("n must be >= 1")
    if spacing <= 0 or wavelength <= 0:
        raise ContractError("spacing and wavelength must be positive")
    return 4.0 * n ** 2 * spacing ** 2 / wavelength
