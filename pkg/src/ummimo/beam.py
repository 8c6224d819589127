"""Beamfocusing gains, angular beamwidth, and finite beamdepth."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, SingularityError
from .geometry import ArrayGeometry
from .numerics import fresnel_cs, sinc

__all__ = [
    "BeamSpec",
    "BeamdepthInterval",
    "focus_phases",
    "array_gain",
    "angular_taper",
    "beamwidth_3db",
    "depth_gain",
    "beamdepth_3db",
]

# depth-gain series about x = 0: A(x) = 1 + c2 x^2 + c4 x^4 + c6 x^6 + O(x^8)
_A_SERIES = (1.0, -0.4386490844928604, 0.08933461611583998, -0.01107570291036017)
_A_SERIES_CUTOFF = 1e-3


@dataclass(frozen=True)
class BeamSpec:
    """Per-element phases focusing the array on a point; defined modulo a
    common additive constant."""

    focus: np.ndarray   # (3,)
    phases: np.ndarray  # (M,) radians

    def __post_init__(self):
        if not np.all(np.isfinite(self.phases)):
            raise DomainError("phases must be finite")


def focus_phases(geom: ArrayGeometry, point) -> BeamSpec:
    """Phases psi_m = (2 pi / lambda) dist(point, p_m) that cancel the
    propagation phase at the focus point."""
    point = np.asarray(point, dtype=float)
    d = np.linalg.norm(point[None, :] - geom.positions, axis=1)
    if np.any(d == 0):
        raise SingularityError("focus point coincides with an array element")
    return BeamSpec(point, 2.0 * np.pi / geom.wavelength * d)


def array_gain(geom: ArrayGeometry, spec: BeamSpec, rx) -> float:
    """Array gain (1/M) |sum_m e^{-j kappa d_m(rx)} e^{j psi_m}|^2 in [0, M]."""
    rx = np.asarray(rx, dtype=float)
    d = np.linalg.norm(rx[None, :] - geom.positions, axis=1)
    if np.any(d == 0):
        raise SingularityError("receive point coincides with an array element")
    total = np.exp(1j * (spec.phases - 2.0 * np.pi / geom.wavelength * d)).sum()
    return float(abs(total) ** 2 / geom.num_elements)


def angular_taper(n: int, spacing: float, wavelength: float, phi: float) -> float:
    """Off-focus array gain M sinc^2(N Delta sin(phi) / lambda), M = N^2.

    phi is the angular offset between the focused direction and the
    observation direction at equal range; independent of the range itself.
    """
    if n < 1:
        raise DomainError("n must be >= 1")
    m = n * n
    return float(m * sinc(n * spacing * np.sin(phi) / wavelength) ** 2)


def beamwidth_3db(n: int, spacing: float, wavelength: float) -> float:
    """Half-power angular beamwidth 0.886 lambda / (N Delta) in radians."""
    if n * spacing <= 0.443 * wavelength:
        raise DomainError("array is electrically too small for a 3 dB width")
    return 0.886 * wavelength / (n * spacing)


def _depth_profile(x: float) -> float:
    """A(x) = (C^2(sqrt x) + S^2(sqrt x))^2 / x^2 with the x -> 0 limit 1.

    Deep in the tail (x > 900) the Fresnel integrals are replaced by their
    1/2 limits; the profile there is below 3e-7 and the relative error of
    the replacement decays as x^{-1/2}.
    """
    if x < 0:
        raise DomainError("x must be >= 0")
    if x <= _A_SERIES_CUTOFF:
        c0, c2, c4, c6 = _A_SERIES
        return c0 + c2 * x ** 2 + c4 * x ** 4 + c6 * x ** 6
    if x > 900.0:
        return 0.25 / (x * x)
    c, s = fresnel_cs(np.sqrt(x))
    return (c * c + s * s) ** 2 / (x * x)


def depth_gain(focus: float, z: float, d_fraunhofer: float) -> float:
    """Normalized array gain at depth z when focused at depth `focus`.

    Evaluates A(d_F / (8 z_eff)) with z_eff = F z / |F - z|; equals 1 at
    z = focus and is symmetric under swapping (focus, z).
    """
    if focus <= 0 or z <= 0:
        raise DomainError("focus and z must be positive")
    if focus == z:
        return 1.0
    z_eff = focus * z / abs(focus - z)
    return _depth_profile(d_fraunhofer / (8.0 * z_eff))


@dataclass(frozen=True)
class BeamdepthInterval:
    """Half-power depth interval [z_near, z_far] and its length."""

    depth: float   # inf when the focus is at or beyond d_F / 10
    z_near: float  # d_F F / (d_F + 10 F); converges to d_F/10 as F grows
    z_far: float   # d_F F / (d_F - 10 F) when finite, else inf


def beamdepth_3db(focus: float, d_fraunhofer: float) -> BeamdepthInterval:
    """Half-power beamdepth of a beam focused at depth `focus`.

    Finite only for focus < d_F / 10: then 20 d_F F^2 / (d_F^2 - 100 F^2).
    Beyond that boundary the beam extends to infinity and only the near
    endpoint is finite.
    """
    if focus <= 0 or d_fraunhofer <= 0:
        raise DomainError("focus and d_fraunhofer must be positive")
    z_near = d_fraunhofer * focus / (d_fraunhofer + 10.0 * focus)
    if focus >= d_fraunhofer / 10.0:
        return BeamdepthInterval(np.inf, z_near, np.inf)
    z_far = d_fraunhofer * focus / (d_fraunhofer - 10.0 * focus)
    depth = 20.0 * d_fraunhofer * focus ** 2 / (d_fraunhofer ** 2 - 100.0 * focus ** 2)
    return BeamdepthInterval(depth, z_near, z_far)
