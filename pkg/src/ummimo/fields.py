"""Scalar near-field factors, aperture gain integrals, and Hertzian-dipole fields.

Phasor convention is e^{-j omega t}, so outgoing waves carry e^{-j kappa r}
propagation phase; every module in the package shares this sign.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.constants import epsilon_0, speed_of_light

from .errors import DomainError, SingularityError

__all__ = [
    "DipoleSegment",
    "FieldSample",
    "near_field_factor",
    "edge_phase_and_power",
    "aperture_gain",
    "aperture_gain_subdivided",
    "isotropic_area",
    "dipole_field",
    "array_field",
]


@dataclass(frozen=True)
class DipoleSegment:
    """A Hertzian-dipole segment: position (m) and moment vector (A m)."""

    position: np.ndarray  # (3,)
    moment: np.ndarray    # (3,) complex

    def __post_init__(self):
        pos = np.asarray(self.position, dtype=float)
        mom = np.asarray(self.moment, dtype=complex)
        if pos.shape != (3,) or mom.shape != (3,):
            raise DomainError("position and moment must be 3-vectors")
        if not np.all(np.isfinite(pos)):
            raise DomainError("segment position must be finite")
        object.__setattr__(self, "position", pos)
        object.__setattr__(self, "moment", mom)


@dataclass(frozen=True)
class FieldSample:
    """Electric field (V/m) in the global spherical basis at the observation point."""

    E: np.ndarray  # (3,) complex: (radial, elevation, azimuthal) components


def near_field_factor(z: float, wavelength: float) -> float:
    """Squared magnitude of the point-source field correction, 1 - q^-2 + q^-4.

    q = 2 pi z / lambda.  Approaches 1 rapidly with distance: 0.99 at z = 2
    wavelengths, which is the conventional single-antenna far-field boundary.
    """
    if z <= 0:
        raise DomainError(f"z must be positive, got {z}")
    q = 2.0 * np.pi * z / wavelength
    return 1.0 - q ** -2 + q ** -4


def edge_phase_and_power(z: float, D: float, wavelength: float) -> tuple[float, float]:
    """Center-to-edge phase shift and power ratio over an aperture of size D.

    Uses the exact path difference Delta = sqrt(z^2 + D^2/4) - z, not its
    Taylor form.  Returns (phase rad, power ratio z^2/(z+Delta)^2).  Only
    meaningful when the source is beyond the aperture half-size (z > D/2).
    """
    if z <= D / 2:
        raise DomainError("requires z > D/2")
    delta = np.hypot(z, D / 2.0) - z
    phase = 2.0 * np.pi / wavelength * delta
    power_ratio = z ** 2 / (z + delta) ** 2
    return float(phase), float(power_ratio)


def isotropic_area(wavelength: float) -> float:
    """Effective area lambda^2 / (4 pi) of an isotropic reference antenna."""
    return wavelength ** 2 / (4.0 * np.pi)


def _panel_nodes(lo: float, hi: float, wavelength: float, order: int = 8):
    # composite Gauss-Legendre: panels no wider than lambda/2 keeps >= 16
    # nodes per wavelength against the ~1/lambda oscillation of the integrand
    n_panels = max(2, int(np.ceil((hi - lo) / (wavelength / 2.0))))
    edges = np.linspace(lo, hi, n_panels + 1)
    xg, wg = leggauss(order)
    mids = (edges[:-1] + edges[1:]) / 2
    half = (edges[1:] - edges[:-1]) / 2
    nodes = (mids[:, None] + half[:, None] * xg[None, :]).ravel()
    weights = (half[:, None] * wg[None, :]).ravel()
    return nodes, weights


def _aperture_integral(x0: float, x1: float, y0: float, y1: float,
                       z: float, wavelength: float) -> complex:
    xs, wx = _panel_nodes(x0, x1, wavelength)
    ys, wy = _panel_nodes(y0, y1, wavelength)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    phase = np.exp(-2j * np.pi / wavelength * np.sqrt(X ** 2 + Y ** 2 + z ** 2))
    return complex(np.einsum("i,j,ij->", wx, wy, phase))


def aperture_gain(a: float, b: float, z: float, wavelength: float) -> float:
    """Gain of an a x b receiving aperture for a broadside point source at z.

    Integrates the spherical-wavefront phase over the aperture; the far-field
    maximum is a*b / isotropic_area(wavelength), reached once the phase is
    constant over the aperture (z >> Fraunhofer distance).  Composite
    Gauss-Legendre quadrature keeps the relative error below 1e-4.
    """
    if a <= 0 or b <= 0 or z <= 0:
        raise DomainError("a, b, z must be positive")
    I = _aperture_integral(-a / 2, a / 2, -b / 2, b / 2, z, wavelength)
    return abs(I) ** 2 / (isotropic_area(wavelength) * a * b)


def aperture_gain_subdivided(a: float, b: float, n_x: int, n_y: int,
                             z: float, wavelength: float) -> float:
    """Total gain when the aperture is split into n_x x n_y elements.

    Per-element gains are phase-aligned and summed (maximum-ratio combining
    across elements), which sidesteps the spherical-phase cancellation that
    penalizes one large aperture.  Returns the summed gain in the same
    normalization as aperture_gain.
    """
    if n_x < 1 or n_y < 1:
        raise DomainError("subdivision counts must be >= 1")
    ax, by = a / n_x, b / n_y
    total = 0.0
    area_iso = isotropic_area(wavelength)
    for i in range(n_x):
        x0 = -a / 2 + i * ax
        for j in range(n_y):
            y0 = -b / 2 + j * by
            I = _aperture_integral(x0, x0 + ax, y0, y0 + by, z, wavelength)
            total += abs(I) ** 2 / (area_iso * ax * by)
    return total


# ---------------------------------------------------------------------------
# Hertzian dipole fields
# ---------------------------------------------------------------------------

def _spherical_basis(p: np.ndarray):
    """Orthonormal (radial, azimuthal, elevation) unit vectors at p.

    Elevation angle is measured from the xy-plane.  At the poles (zero
    transverse component) the azimuth is taken as 0, the limit along phi = 0.
    """
    x, y, z = p
    r = np.linalg.norm(p)
    rho = np.hypot(x, y)
    if rho == 0.0:
        cphi, sphi = 1.0, 0.0
    else:
        cphi, sphi = x / rho, y / rho
    sth = z / r
    cth = rho / r
    u_r = np.array([cphi * cth, sphi * cth, sth])
    u_az = np.array([-sphi, cphi, 0.0])
    u_el = np.array([-cphi * sth, -sphi * sth, cth])
    return u_r, u_az, u_el


def _amplitudes(r: float, wavelength: float):
    kappa = 2.0 * np.pi / wavelength
    omega = kappa * speed_of_light
    ph = np.exp(-1j * kappa * r)
    a_rad = ph / (1j * omega * epsilon_0 * 2.0 * np.pi) * (1.0 / r ** 3 + 1j * kappa / r ** 2)
    a_ang = -ph / (1j * omega * epsilon_0 * 4.0 * np.pi) * (
        1.0 / r ** 3 + 1j * kappa / r ** 2 - kappa ** 2 / r
    )
    return a_rad, a_ang


def dipole_transform(p: np.ndarray, wavelength: float) -> np.ndarray:
    """3x3 map T(p) from a dipole moment at the origin to the spherical-basis
    field components (E_r, E_el, E_az) at observation point p."""
    p = np.asarray(p, dtype=float)
    r = np.linalg.norm(p)
    if r == 0.0:
        raise SingularityError("observation point coincides with the dipole")
    u_r, u_az, u_el = _spherical_basis(p)
    a_rad, a_ang = _amplitudes(r, wavelength)
    return np.stack([a_rad * u_r, a_ang * u_el, a_ang * u_az])


def dipole_field(segment: DipoleSegment, p, wavelength: float) -> FieldSample:
    """Field of a single Hertzian dipole (segment position taken as origin)."""
    rel = np.asarray(p, dtype=float) - segment.position
    return FieldSample(dipole_transform(rel, wavelength) @ segment.moment)


def _basis_matrix(p: np.ndarray) -> np.ndarray:
    u_r, u_az, u_el = _spherical_basis(p)
    return np.stack([u_r, u_el, u_az], axis=1)  # columns


def array_field(segments, moment_matrices, x: np.ndarray, p,
                wavelength: float) -> FieldSample:
    """Superposed field of dipole segments driven by the excitation vector x.

    moment_matrices[k] is the 3 x N map from x to segment k's moment vector,
    so the result is linear in x.  The per-segment fields are rotated from
    each segment's local spherical basis into Cartesian and the sum is
    expressed in the global spherical basis at p.
    """
    p = np.asarray(p, dtype=float)
    x = np.asarray(x, dtype=complex)
    e_cart = np.zeros(3, dtype=complex)
    for seg, Mk in zip(segments, moment_matrices):
        rel = p - seg.position
        if np.linalg.norm(rel) == 0.0:
            raise SingularityError("observation point coincides with a segment")
        m = np.asarray(Mk, dtype=complex) @ x
        e_local = dipole_transform(rel, wavelength) @ m
        e_cart += _basis_matrix(rel) @ e_local
    return FieldSample(_basis_matrix(p).T @ e_cart)
