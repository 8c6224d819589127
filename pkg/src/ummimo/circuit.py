"""Impedance-based physically consistent MIMO channel layer.

Mutual impedances of incremental z-oriented dipoles come from the analytic
second derivative of the spherical wave (the Green-function form, with the
e^{+j kappa r} outgoing-wave phasor of the impedance analysis; the real part
is phasor-convention independent).  The end-to-end voltage channel, transmit
power, and receiver noise covariance follow the unilateral multiport model.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.constants import Boltzmann, epsilon_0, speed_of_light

from .errors import ContractError, SingularityError
from .geometry import ArrayGeometry
from .numerics import QuadratureGrid

__all__ = [
    "ImpedanceSet",
    "LnaParams",
    "mutual_impedance_z_dipoles",
    "mutual_impedance_z_loops",
    "self_resistance",
    "impedance_set",
    "end_to_end_channel",
    "tx_power",
    "noise_covariance",
    "radiation_matrix",
]


@dataclass(frozen=True)
class ImpedanceSet:
    """Partitioned impedance blocks of a unilateral tx/rx antenna system.

    Z_T and Z_R are complex symmetric (reciprocity: non-conjugate transpose
    symmetry) with positive-semidefinite real parts; Z_RT couples transmit
    currents to receive open-circuit voltages.
    """

    Z_T: np.ndarray
    Z_R: np.ndarray
    Z_RT: np.ndarray
    R0: float  # generator reference resistance, ohms

    def __post_init__(self):
        for name in ("Z_T", "Z_R"):
            Z = np.asarray(getattr(self, name), dtype=complex)
            scale = max(np.linalg.norm(Z), 1e-300)
            if np.linalg.norm(Z - Z.T) > 1e-8 * scale:
                raise ContractError(f"{name} must be symmetric (reciprocity)")
            re = 0.5 * np.real(Z + Z.conj().T)
            w = np.linalg.eigvalsh(re)
            if w.min() < -1e-8 * np.linalg.norm(re):
                raise ContractError(f"Re({name}) must be positive semidefinite")
            object.__setattr__(self, name, Z)
        Z_RT = np.asarray(self.Z_RT, dtype=complex)
        if Z_RT.shape != (self.Z_R.shape[0], self.Z_T.shape[0]):
            raise ContractError("Z_RT must be M x N")
        if self.R0 <= 0:
            raise ContractError("R0 must be positive")
        object.__setattr__(self, "Z_RT", Z_RT)


@dataclass(frozen=True)
class LnaParams:
    """Equivalent input noise parameters of the receive amplifiers."""

    R_v: float = 5.0       # voltage-noise resistance, ohms
    G_i: float = 2e-3      # current-noise conductance, siemens
    beta: float = 0.0      # voltage/current noise correlation (real)
    temperature: float = 290.0  # kelvin

    def __post_init__(self):
        if self.R_v < 0 or self.G_i < 0:
            raise ContractError("R_v and G_i must be nonnegative")
        if self.temperature <= 0:
            raise ContractError("temperature must be positive")


def _dipole_bracket(p: np.ndarray, kappa: float) -> complex:
    """[d^2/dz^2 + kappa^2] e^{j kappa r} / (4 pi r) in closed form."""
    r = float(np.linalg.norm(p))
    if r == 0.0:
        raise SingularityError("zero separation; use self_resistance for Re Z(0)")
    cos2 = (p[2] / r) ** 2
    sin2 = 1.0 - cos2
    return np.exp(1j * kappa * r) / (4.0 * np.pi) * (
        kappa ** 2 * sin2 / r + (1j * kappa / r ** 2 - 1.0 / r ** 3) * (1.0 - 3.0 * cos2)
    )


def mutual_impedance_z_dipoles(p, wavelength: float, length: float) -> complex:
    """Mutual impedance of two z-oriented incremental electric dipoles.

    Z(p) = (L0^2 / (j omega eps0)) [d^2/dz^2 + kappa^2] e^{j kappa |p|}/(4 pi |p|),
    evaluated analytically.  Even in p, azimuthally symmetric about z, finite
    for every |p| > 0, and decaying as 1/|p| in the radiation zone.
    """
    p = np.asarray(p, dtype=float)
    kappa = 2.0 * np.pi / wavelength
    omega = kappa * speed_of_light
    return length ** 2 / (1j * omega * epsilon_0) * _dipole_bracket(p, kappa)


def mutual_impedance_z_loops(p, wavelength: float, area: float) -> complex:
    """Mutual impedance of two z-oriented incremental current loops.

    Z(p) = (A0^2 / (j omega eps0)) [d^2/dx^2 + d^2/dy^2] e^{j kappa |p|}/(4 pi |p|).
    Away from the origin the spherical wave satisfies the Helmholtz equation,
    so the transverse Laplacian equals minus the z-dipole operator.
    """
    p = np.asarray(p, dtype=float)
    kappa = 2.0 * np.pi / wavelength
    omega = kappa * speed_of_light
    return -area ** 2 / (1j * omega * epsilon_0) * _dipole_bracket(p, kappa)


def self_resistance(length: float, wavelength: float) -> float:
    """Radiation resistance Re Z(0) = L0^2 kappa^3 / (6 pi omega eps0) of an
    incremental z-dipole.

    The closed form is the half-residue (propagating plane-wave) part of the
    wavenumber-disk integral; it equals the classical (2 pi / 3) Z0 (L0 /
    lambda)^2.  Valid for dipoles short compared to the wavelength.
    """
    if not 0 < length < wavelength:
        raise ContractError("incremental dipole requires 0 < length < wavelength")
    kappa = 2.0 * np.pi / wavelength
    omega = kappa * speed_of_light
    return length ** 2 * kappa ** 3 / (6.0 * np.pi * omega * epsilon_0)


def impedance_set(tx: ArrayGeometry, rx: ArrayGeometry, length: float,
                  R0: float = 50.0, self_reactance: float = 0.0) -> ImpedanceSet:
    """Impedance blocks for z-dipole arrays under the unilateral approximation.

    Off-diagonal entries are mutual impedances of the corresponding element
    pair; diagonal entries are self_resistance(length) + j self_reactance
    (the point-dipole self-reactance diverges, so a finite model value must
    be chosen explicitly).
    """
    lam = tx.wavelength
    if abs(rx.wavelength - lam) > 1e-12 * lam:
        raise ContractError("tx and rx geometries must share the wavelength")

    def block(pos_a, pos_b, same: bool):
        n_a, n_b = len(pos_a), len(pos_b)
        Z = np.zeros((n_a, n_b), dtype=complex)
        for i in range(n_a):
            for j in range(n_b):
                if same and i == j:
                    Z[i, j] = self_resistance(length, lam) + 1j * self_reactance
                    continue
                sep = pos_a[i] - pos_b[j]
                if np.linalg.norm(sep) == 0:
                    raise ContractError("coincident elements across arrays")
                Z[i, j] = mutual_impedance_z_dipoles(sep, lam, length)
        return Z

    Z_T = block(tx.positions, tx.positions, True)
    Z_R = block(rx.positions, rx.positions, True)
    Z_RT = block(rx.positions, tx.positions, False)
    return ImpedanceSet(Z_T, Z_R, Z_RT, R0)


def end_to_end_channel(imp: ImpedanceSet) -> np.ndarray:
    """Voltage-transfer matrix H = Z_RT (Z_T + R0 I)^{-1}; linear in Z_RT."""
    n = imp.Z_T.shape[0]
    A = imp.Z_T + imp.R0 * np.eye(n)
    cond = np.linalg.cond(A)
    if not np.isfinite(cond) or cond > 1e14:
        raise ContractError("Z_T + R0 I is numerically singular")
    return np.linalg.solve(A.T, imp.Z_RT.T).T


def tx_power(currents: np.ndarray, Z_T: np.ndarray) -> float:
    """Time-average radiated power (1/2) I^H Re(Z_T) I with open receive ports.

    The quadratic form includes mutual-resistance coupling; summing squared
    current magnitudes against the diagonal alone is wrong whenever the
    off-diagonal resistances are non-negligible.
    """
    I = np.asarray(currents, dtype=complex)
    Z = np.asarray(Z_T, dtype=complex)
    if Z.shape != (I.size, I.size):
        raise ContractError("current vector and Z_T dimensions disagree")
    re = 0.5 * np.real(Z + Z.conj().T)
    return float(0.5 * np.real(I.conj() @ (re @ I)))


def noise_covariance(Z_R: np.ndarray, lna: LnaParams) -> np.ndarray:
    """Receiver noise covariance (V^2/Hz):

    R_n = 4 k_B T [ Re((1 + beta) Z_R) + R_v I + G_i Z_R Z_R^H ].

    Hermitian by construction (symmetrized exactly); parameters producing a
    matrix with a negative eigenvalue violate the contract.
    """
    Z = np.asarray(Z_R, dtype=complex)
    m = Z.shape[0]
    re = 0.5 * np.real((1.0 + lna.beta) * (Z + Z.conj().T))
    Rn = re + lna.R_v * np.eye(m) + lna.G_i * (Z @ Z.conj().T)
    Rn = 0.5 * (Rn + Rn.conj().T)
    Rn *= 4.0 * Boltzmann * lna.temperature
    w = np.linalg.eigvalsh(Rn)
    if w.min() < -1e-12 * max(np.linalg.norm(Rn), 1e-300):
        raise ContractError(
            f"noise covariance not PSD (min eigenvalue {w.min():.3e}); "
            f"check beta={lna.beta} against Re(Z_R)"
        )
    return Rn


def radiation_matrix(pattern_samples: np.ndarray, grid: QuadratureGrid) -> np.ndarray:
    """Pattern-coupling (radiation) matrix B = integral of s s^H over the sphere.

    pattern_samples holds the per-port pattern values, one row per port and
    one column per grid node; the grid must cover the full sphere (total
    weight 4 pi).  B is Hermitian PSD; for lossless arrays its eigenvalues
    lie in [0, 1] after the scattering normalization B = I - S S^H.
    """
    S = np.atleast_2d(np.asarray(pattern_samples, dtype=complex))
    if S.shape[1] != grid.size:
        raise ContractError("pattern samples do not match the grid size")
    total = float(grid.weights.sum())
    if abs(total - 4.0 * np.pi) > 1e-6 * 4.0 * np.pi:
        raise ContractError("grid must cover the full sphere for the radiation matrix")
    B = (S * grid.weights) @ S.conj().T
    return 0.5 * (B + B.conj().T)
