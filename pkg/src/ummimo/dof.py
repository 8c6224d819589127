"""Spatial degrees-of-freedom formulas, effective rank, and deployment arithmetic."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.constants import speed_of_light

from .errors import ContractError, DomainError

__all__ = [
    "DofReport",
    "Dof2d",
    "dof_1d",
    "dof_2d",
    "effective_rank",
    "dof_report",
    "bbu_rate",
    "active_rf_chains",
]


def dof_1d(length: float, wavelength: float) -> float:
    """Spatial DoF 2 L / lambda observable on a line segment of length L."""
    if length <= 0 or wavelength <= 0:
        raise DomainError("length and wavelength must be positive")
    return 2.0 * length / wavelength


class Dof2d(NamedTuple):
    eta: float        # pi Lx Ly / lambda^2
    separable: float  # 4 Lx Ly / lambda^2, the per-axis over-count
    ratio: float      # pi / 4


def dof_2d(length_x: float, length_y: float, wavelength: float) -> Dof2d:
    """Spatial DoF pi Lx Ly / lambda^2 of a rectangular aperture.

    Also returns the separable per-axis product 4 Lx Ly / lambda^2, which
    over-counts by the square-to-disk area ratio 4/pi.
    """
    if length_x < 0 or length_y < 0 or wavelength <= 0:
        raise DomainError("lengths must be >= 0 and wavelength positive")
    area = length_x * length_y / wavelength ** 2
    return Dof2d(np.pi * area, 4.0 * area, np.pi / 4.0)


def effective_rank(spectrum, capture_fraction: float = 0.99) -> int:
    """Smallest k whose top-k eigenvalues capture the configured trace fraction."""
    spectrum = np.asarray(spectrum, dtype=float)
    if spectrum.size == 0:
        raise ContractError("spectrum must be nonempty")
    if np.any(spectrum < 0):
        raise ContractError("spectrum must be nonnegative")
    if not 0.0 < capture_fraction <= 1.0:
        raise DomainError("capture_fraction must be in (0, 1]")
    s = np.sort(spectrum)[::-1]
    cum = np.cumsum(s)
    return int(np.searchsorted(cum, capture_fraction * cum[-1] - 1e-15 * cum[-1]) + 1)


@dataclass(frozen=True)
class DofReport:
    """Eigen-spectrum summary of a spatial correlation matrix."""

    eta: float                 # DoF formula value for the underlying aperture
    eigen_spectrum: np.ndarray  # descending, normalized to max = 1
    effective_rank: int
    capture_fraction: float


def dof_report(R: np.ndarray, eta: float, capture_fraction: float = 0.99) -> DofReport:
    """Summarize a correlation matrix against a DoF formula prediction."""
    w = np.linalg.eigvalsh(np.asarray(R))[::-1]
    w = np.clip(w, 0.0, None)
    rank = effective_rank(w, capture_fraction)
    top = w[0] if w[0] > 0 else 1.0
    return DofReport(eta, w / top, rank, capture_fraction)


def bbu_rate(area: float, bandwidth: float, bits_per_sample: float,
             carrier_hz: float) -> float:
    """Baseband aggregation rate A B b f_c^2 pi / c^2 in bit/s.

    The minimum fronthaul rate when one sample per spatial DoF per Nyquist
    interval is forwarded from an aperture of the given area.
    """
    if bandwidth < 0 or bits_per_sample < 0 or carrier_hz < 0 or area < 0:
        raise DomainError("arguments must be nonnegative")
    return area * bandwidth * bits_per_sample * carrier_hz ** 2 * np.pi / speed_of_light ** 2


def active_rf_chains(area: float, active_fraction: float, chain_density: float) -> float:
    """RF chains A tau mu forwarded to the baseband unit at a time instant."""
    if not 0.0 <= active_fraction <= 1.0:
        raise DomainError("active_fraction must lie in [0, 1]")
    if area < 0 or chain_density < 0:
        raise DomainError("area and chain density must be nonnegative")
    return area * active_fraction * chain_density
