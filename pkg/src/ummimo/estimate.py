"""Pilot-based channel estimation: LS, MMSE with water-filling pilot design,
reduced-subspace LS, and orthogonal matching pursuit over a far-field
dictionary."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from .errors import ConfigError, ContractError, DomainError
from .geometry import ArrayGeometry
from .numerics import QuadratureGrid, RngStream, complex_gaussian
from .channel import SpatialCorrelation, correlation_matrix, isotropic_profile, sample_rayleigh

__all__ = [
    "PilotMatrix",
    "Dictionary",
    "EstimatorResult",
    "orthogonal_pilot",
    "received_pilot",
    "ls_estimate",
    "mmse_estimate",
    "mmse_pilot_design",
    "rsls_estimate",
    "rsls_pilot",
    "isotropic_subspace",
    "build_ff_dictionary",
    "omp_estimate",
    "nmse_sweep",
]

_PINV_RTOL = 1e-10  # singular values below this times the largest are zero


@dataclass(frozen=True)
class PilotMatrix:
    """Pilot sequence matrix (tau_p x M), pilot power, and noise power.

    The average pilot power is normalized to one: trace(phi^H phi) = tau_p.
    """

    phi: np.ndarray
    power: float
    noise_power: float

    def __post_init__(self):
        phi = np.asarray(self.phi, dtype=complex)
        if phi.ndim != 2:
            raise ContractError("pilot matrix must be 2-D")
        tau = phi.shape[0]
        energy = float(np.sum(np.abs(phi) ** 2))
        if abs(energy - tau) > 1e-8 * max(tau, 1):
            raise ContractError(
                f"trace(phi^H phi) = {energy:.9g}, expected tau_p = {tau}"
            )
        if self.power <= 0 or self.noise_power < 0:
            raise ContractError("power must be > 0 and noise_power >= 0")
        object.__setattr__(self, "phi", phi)

    @property
    def tau(self) -> int:
        return self.phi.shape[0]

    @property
    def num_antennas(self) -> int:
        return self.phi.shape[1]


def orthogonal_pilot(m: int, tau: int, power: float, noise_power: float,
                     stream: RngStream | None = None) -> PilotMatrix:
    """Pilot with orthonormal rows (unitary when tau = m).

    Deterministic DFT rows when no stream is given, otherwise a seeded random
    orthonormal set.  For tau > m, DFT blocks are stacked cyclically.
    """
    if tau < 1 or m < 1:
        raise ContractError("tau and m must be >= 1")
    if stream is None:
        n = np.arange(m)
        F = np.exp(-2j * np.pi * np.outer(n, n) / m) / np.sqrt(m)
        rows = np.vstack([F] * (tau // m + 1))[:tau]
    else:
        g = stream.generator()
        G = g.standard_normal((m, m)) + 1j * g.standard_normal((m, m))
        if tau <= m:
            Q, _ = np.linalg.qr(G[:, :tau])  # m x tau orthonormal columns
            rows = Q.conj().T
        else:
            F = np.linalg.qr(G)[0].conj().T  # m x m unitary rows
            rows = np.vstack([F] * (tau // m + 1))[:tau]
    return PilotMatrix(rows, power, noise_power)


def received_pilot(pilot: PilotMatrix, h: np.ndarray, stream: RngStream) -> np.ndarray:
    """y = sqrt(p) phi h + n with n ~ CN(0, sigma^2 I)."""
    h = np.asarray(h, dtype=complex)
    if h.shape != (pilot.num_antennas,):
        raise ContractError(
            f"channel has shape {h.shape}, pilot expects ({pilot.num_antennas},)"
        )
    noise = np.sqrt(pilot.noise_power) * complex_gaussian(pilot.tau, stream)
    return np.sqrt(pilot.power) * (pilot.phi @ h) + noise


def ls_estimate(y: np.ndarray, pilot: PilotMatrix) -> np.ndarray:
    """Least-squares estimate: the minimizer of ||y - sqrt(p) phi h||^2.

    Uses the pseudo-inverse, which coincides with phi^{-1} y / sqrt(p) for
    square invertible pilots and extends to tau_p < M (then only the row
    space of phi is estimated).  A rank-deficient pilot with tau_p >= M
    degrades to the pseudo-inverse with a warning.
    """
    phi = pilot.phi
    s = np.linalg.svd(phi, compute_uv=False)
    rank = int(np.sum(s > _PINV_RTOL * s[0]))
    if pilot.tau >= pilot.num_antennas and rank < pilot.num_antennas:
        warnings.warn("rank-deficient pilot with tau_p >= M; using pseudo-inverse",
                      RuntimeWarning, stacklevel=2)
    return np.linalg.pinv(phi, rcond=_PINV_RTOL) @ y / np.sqrt(pilot.power)


def _mmse_gain(R: np.ndarray, pilot: PilotMatrix) -> np.ndarray:
    """W = sqrt(p) R phi^H (p phi R phi^H + sigma^2 I)^{-1}."""
    p, s2 = pilot.power, pilot.noise_power
    phi = pilot.phi
    A = p * (phi @ R @ phi.conj().T) + s2 * np.eye(pilot.tau)
    B = np.sqrt(p) * (R @ phi.conj().T)
    cond = np.linalg.cond(A)
    if not np.isfinite(cond) or cond > 1.0 / _PINV_RTOL:
        warnings.warn("ill-conditioned MMSE inner matrix; using regularized solve",
                      RuntimeWarning, stacklevel=3)
        return B @ np.linalg.pinv(A, rcond=_PINV_RTOL)
    return np.linalg.solve(A.conj().T, B.conj().T).conj().T


def mmse_estimate(y: np.ndarray, pilot: PilotMatrix,
                  corr: SpatialCorrelation | np.ndarray):
    """MMSE estimate and its analytic mean squared error.

    hhat = sqrt(p) R phi^H (p phi R phi^H + sigma^2 I)^{-1} y;
    MSE = tr(R) - tr(p R phi^H (p phi R phi^H + sigma^2 I)^{-1} phi R).
    Returns (estimate, analytic_mse).
    """
    R = corr.R if isinstance(corr, SpatialCorrelation) else np.asarray(corr)
    W = _mmse_gain(R, pilot)
    mse = float(np.trace(R).real
                - np.sqrt(pilot.power) * np.trace(W @ pilot.phi @ R).real)
    return W @ y, mse


def mmse_pilot_design(corr: SpatialCorrelation | np.ndarray, power: float,
                      noise_power: float, tau: int) -> PilotMatrix:
    """MSE-optimal pilot phi = D U^H with water-filling power allocation.

    U holds the eigenvectors of R (eigenvalues descending); the tau_p
    strongest directions receive powers max(0, mu - sigma^2 / (p lambda_m))
    with the water level mu chosen so the powers sum to tau_p.
    """
    R = corr.R if isinstance(corr, SpatialCorrelation) else np.asarray(corr)
    m = R.shape[0]
    if tau > m:
        raise ContractError("tau_p must not exceed the antenna count")
    w, U = np.linalg.eigh(0.5 * (R + R.conj().T))
    w, U = w[::-1], U[:, ::-1]
    lam = np.clip(w[:tau], 0.0, None)
    if np.all(lam <= 0):
        raise ContractError("correlation matrix has no energy to sound")
    with np.errstate(divide="ignore"):
        floor = np.where(lam > 0, noise_power / (power * lam), np.inf)

    def allocated(mu):
        return float(np.sum(np.clip(mu - floor, 0.0, None)))

    lo, hi = 0.0, float(np.min(floor) + tau)
    while allocated(hi) < tau:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if allocated(mid) < tau:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-12 * tau / max(1.0, tau):
            break
    mu = 0.5 * (lo + hi)
    d = np.sqrt(np.clip(mu - floor, 0.0, None))
    # exact trace normalization (bisection leaves ~1e-12 slack)
    d *= np.sqrt(tau / np.sum(d ** 2))
    phi = d[:, None] * U[:, :tau].conj().T
    return PilotMatrix(phi, power, noise_power)


def rsls_estimate(y: np.ndarray, pilot: PilotMatrix, subspace: np.ndarray) -> np.ndarray:
    """Reduced-subspace LS: least squares restricted to span(subspace).

    subspace is M x r with orthonormal columns and tau_p >= r.  Noise in the
    orthogonal complement is removed entirely; the estimate always lies in
    the subspace.
    """
    U = np.asarray(subspace, dtype=complex)
    r = U.shape[1]
    gram = U.conj().T @ U
    if np.linalg.norm(gram - np.eye(r)) > 1e-8 * np.sqrt(r):
        raise ContractError("subspace columns must be orthonormal")
    if pilot.tau < r:
        raise ContractError(f"tau_p = {pilot.tau} < subspace dimension {r}")
    phiU = pilot.phi @ U
    G = phiU.conj().T @ phiU
    v = np.linalg.solve(G, phiU.conj().T @ y)
    return U @ v / np.sqrt(pilot.power)


def rsls_pilot(subspace: np.ndarray, tau: int, power: float, noise_power: float,
               mixing: np.ndarray | None = None) -> PilotMatrix:
    """MSE-optimal RS-LS pilot sqrt(tau_p / r) S U^H.

    S is any tau_p x r matrix with orthonormal columns; the default extends
    the identity.  Any valid choice yields the same MSE.
    """
    U = np.asarray(subspace, dtype=complex)
    m, r = U.shape
    if tau < r:
        raise ContractError(f"tau_p = {tau} < subspace dimension {r}")
    if mixing is None:
        S = np.eye(tau, r, dtype=complex)
    else:
        S = np.asarray(mixing, dtype=complex)
        if S.shape != (tau, r):
            raise ContractError(f"mixing must be ({tau}, {r})")
        if np.linalg.norm(S.conj().T @ S - np.eye(r)) > 1e-8 * np.sqrt(r):
            raise ContractError("mixing columns must be orthonormal")
    phi = np.sqrt(tau / r) * (S @ U.conj().T)
    return PilotMatrix(phi, power, noise_power)


def isotropic_subspace(geom: ArrayGeometry, capture: float = 0.9999,
                       grid: QuadratureGrid | None = None) -> np.ndarray:
    """Eigenvectors of the isotropic correlation matrix capturing the given
    trace fraction: the array-dependent worst-case channel subspace."""
    corr = correlation_matrix(geom, isotropic_profile(), grid)
    w, U = np.linalg.eigh(corr.R)
    w, U = np.clip(w[::-1], 0.0, None), U[:, ::-1]
    cum = np.cumsum(w)
    r = int(np.searchsorted(cum, capture * cum[-1] - 1e-15 * cum[-1]) + 1)
    return U[:, :r]


# ---------------------------------------------------------------------------
# Compressed sensing over a far-field dictionary
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Dictionary:
    """Far-field atoms (M x K) on a direction-cosine lattice.

    grid holds the (Psi, Omega) = (sin az cos el, sin el) pair per atom; all
    pairs satisfy Psi^2 + Omega^2 <= 1 and every atom has norm sqrt(M).
    """

    atoms: np.ndarray
    grid: np.ndarray  # (K, 2)

    @property
    def num_atoms(self) -> int:
        return self.atoms.shape[1]


def build_ff_dictionary(geom: ArrayGeometry, step: float) -> Dictionary:
    """Uniform direction-cosine dictionary with the given sampling period.

    The lattice covers Psi, Omega in [-1, 1] inclusive and keeps the pairs
    with Psi^2 + Omega^2 <= 1 (closed disk, evaluated in exact integer
    arithmetic).  At step 1/40 this closed-disk convention yields 5025
    atoms; the open disk yields 5013 and dropping the +-1 endpoints 5021.
    """
    if step <= 0:
        raise DomainError("step must be positive")
    n = int(Fraction(1) / Fraction(step).limit_denominator(10 ** 9)) \
        if float(step) <= 1 else 0
    if n >= 1 and abs(n * step - 1.0) < 1e-12:
        idx = np.arange(-n, n + 1)
        I, J = np.meshgrid(idx, idx, indexing="ij")
        keep = I * I + J * J <= n * n
        psi = I[keep] / float(n)
        omega = J[keep] / float(n)
    else:
        vals = np.arange(-1.0, 1.0 + step / 2, step)
        P, O = np.meshgrid(vals, vals, indexing="ij")
        keep = P ** 2 + O ** 2 <= 1.0
        psi, omega = P[keep], O[keep]
    x, y = geom.positions[:, 0], geom.positions[:, 1]
    kappa = 2.0 * np.pi / geom.wavelength
    atoms = np.exp(-1j * kappa * (x[:, None] * psi[None, :] + y[:, None] * omega[None, :]))
    return Dictionary(atoms, np.stack([psi, omega], axis=1))


def omp_estimate(y: np.ndarray, pilot: PilotMatrix, dictionary: Dictionary,
                 sparsity: int, residual_threshold: float | None = None):
    """Orthogonal matching pursuit against sqrt(p) phi * atoms.

    Greedily selects atoms by maximal normalized residual correlation
    (lowest index wins ties), refits jointly by least squares after each
    selection, and synthesizes the M-vector estimate.  Runs exactly
    `sparsity` iterations unless residual_threshold stops it early.
    Returns (estimate, selected_indices).
    """
    if sparsity < 1:
        raise ContractError("sparsity must be >= 1")
    if sparsity > dictionary.num_atoms:
        raise ContractError("sparsity exceeds the dictionary size")
    if pilot.tau < sparsity:
        raise ContractError("tau_p must be >= the sparsity level")
    A = np.sqrt(pilot.power) * (pilot.phi @ dictionary.atoms)
    norms = np.linalg.norm(A, axis=0)
    norms[norms == 0] = 1.0
    selected: list[int] = []
    residual = np.asarray(y, dtype=complex).copy()
    coef = np.zeros(0, dtype=complex)
    for _ in range(sparsity):
        corr = np.abs(A.conj().T @ residual) / norms
        if selected:
            corr[selected] = -1.0
        selected.append(int(np.argmax(corr)))  # argmax takes the lowest index on ties
        As = A[:, selected]
        coef, *_ = np.linalg.lstsq(As, y, rcond=None)
        residual = y - As @ coef
        if residual_threshold is not None and np.linalg.norm(residual) <= residual_threshold:
            break
    estimate = dictionary.atoms[:, selected] @ coef
    return estimate, selected


# ---------------------------------------------------------------------------
# Monte-Carlo NMSE sweeps
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EstimatorResult:
    """Aggregate NMSE of one estimator at one pilot length."""

    estimator: str
    tau: int
    nmse: float
    stderr: float
    trials: int


_ESTIMATORS = ("ls", "mmse", "rs-ls", "omp")


def nmse_sweep(estimator: str, tau_values, *, power: float, noise_power: float,
               trials: int, stream: RngStream,
               corr: SpatialCorrelation | None = None,
               subspace: np.ndarray | None = None,
               dictionary: Dictionary | None = None,
               sparsity: int | None = None,
               sampler: Callable[[RngStream], np.ndarray] | None = None,
               trace_r: float | None = None,
               pilot_stream: RngStream | None = None) -> list[EstimatorResult]:
    """Monte-Carlo NMSE (MSE / tr(R)) of one estimator across pilot lengths.

    The channel is drawn from `sampler` (default: correlated Rayleigh from
    `corr`); pilots are the estimator's own design (water-filling for MMSE,
    optimal subspace pilots for RS-LS, orthonormal rows otherwise).
    Deterministic for a fixed master stream: trial t at sweep index i uses
    substream (i * trials + t + 1).
    """
    if estimator not in _ESTIMATORS:
        raise ConfigError(f"unknown estimator {estimator!r}; expected one of {_ESTIMATORS}")
    if estimator == "mmse" and corr is None:
        raise ConfigError("mmse needs corr")
    if estimator == "rs-ls" and subspace is None:
        raise ConfigError("rs-ls needs a subspace")
    if estimator == "omp" and (dictionary is None or sparsity is None):
        raise ConfigError("omp needs a dictionary and sparsity")
    if corr is None and (sampler is None or trace_r is None):
        raise ConfigError("need corr, or an explicit sampler with trace_r")

    if sampler is None:
        sampler = lambda s: sample_rayleigh(corr, s)
    if trace_r is None:
        trace_r = float(np.trace(corr.R).real)
    if corr is not None:
        m = corr.R.shape[0]
    elif subspace is not None:
        m = subspace.shape[0]
    elif dictionary is not None:
        m = dictionary.atoms.shape[0]
    else:
        m = len(sampler(stream.split(0)))  # probe draw fixes the dimension

    results = []
    for i, tau in enumerate(tau_values):
        tau = int(tau)
        if estimator == "mmse":
            pilot = mmse_pilot_design(corr, power, noise_power, tau)
        elif estimator == "rs-ls":
            pilot = rsls_pilot(subspace, tau, power, noise_power)
        else:
            pilot = orthogonal_pilot(m, tau, power, noise_power, pilot_stream)
        errs = np.empty(trials)
        for t in range(trials):
            sub = stream.split(i * trials + t + 1)
            h = sampler(sub.split(2 ** 40 + sub.stream))
            y = received_pilot(pilot, h, sub)
            if estimator == "ls":
                hh = ls_estimate(y, pilot)
            elif estimator == "mmse":
                hh, _ = mmse_estimate(y, pilot, corr)
            elif estimator == "rs-ls":
                hh = rsls_estimate(y, pilot, subspace)
            else:
                hh, _ = omp_estimate(y, pilot, dictionary, sparsity)
            errs[t] = np.linalg.norm(hh - h) ** 2
        nmse = errs.mean() / trace_r
        stderr = errs.std(ddof=1) / np.sqrt(trials) / trace_r
        results.append(EstimatorResult(estimator, tau, float(nmse), float(stderr), trials))
    return results
