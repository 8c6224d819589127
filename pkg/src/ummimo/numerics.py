"""Special functions, quadrature grids, linear-algebra contracts, and seeded RNG streams.

Everything downstream (channel statistics, beam geometry, estimators, circuit
models) builds on the primitives in this module, so the contracts here are
deliberately strict: Fresnel integrals to 1e-10 absolute, eigen/SVD
reconstruction to 1e-8 relative, and bitwise-reproducible random streams.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss
from numpy.random import Generator, Philox
from scipy.integrate import quad

from .errors import ContractError, DomainError

__all__ = [
    "QuadratureGrid",
    "RngStream",
    "fresnel_cs",
    "sinc",
    "hermitian_eig",
    "svd",
    "complex_gaussian",
    "hemisphere_grid",
    "sphere_grid",
]


# ---------------------------------------------------------------------------
# Quadrature grids
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuadratureGrid:
    """Tensor product quadrature over (azimuth, elevation) direction angles.

    The weights carry the cos(elevation) solid-angle Jacobian, so for any
    function ``f(az, el)`` the sum ``(f(azimuth, elevation) * weights).sum()``
    approximates the solid-angle integral of f over the covered region.
    Integrating the constant 1 over the front hemisphere returns 2*pi.
    """

    azimuth: np.ndarray    # flat array, radians
    elevation: np.ndarray  # flat array, radians
    weights: np.ndarray    # flat array, strictly positive, includes cos(el)

    def __post_init__(self):
        if not (len(self.azimuth) == len(self.elevation) == len(self.weights)):
            raise ContractError("grid arrays must have equal length")
        if np.any(self.weights <= 0):
            raise ContractError("quadrature weights must be strictly positive")

    @property
    def size(self) -> int:
        return len(self.weights)

    def directions(self) -> np.ndarray:
        """Unit propagation directions, shape (Q, 3).

        Convention: azimuth measured from the array normal (+z) in the xz
        plane, elevation toward +y, so a planar array in the xy-plane sees
        u = (sin az cos el, sin el, cos az cos el).
        """
        az, el = self.azimuth, self.elevation
        return np.stack(
            [np.sin(az) * np.cos(el), np.sin(el), np.cos(az) * np.cos(el)],
            axis=-1,
        )

    def integrate(self, values: np.ndarray) -> complex | float:
        if len(values) != self.size:
            raise ContractError("sample count does not match grid size")
        return (values * self.weights).sum()


def hemisphere_grid(n_azimuth: int = 180, n_elevation: int = 90) -> QuadratureGrid:
    """Gauss-Legendre grid over the front hemisphere az, el in [-pi/2, pi/2]."""
    xa, wa = leggauss(n_azimuth)
    xe, we = leggauss(n_elevation)
    az = xa * (np.pi / 2)
    el = xe * (np.pi / 2)
    AZ, EL = np.meshgrid(az, el, indexing="ij")
    W = np.outer(wa, we) * (np.pi / 2) ** 2 * np.cos(EL)
    return QuadratureGrid(AZ.ravel(), EL.ravel(), W.ravel())


def sphere_grid(n_azimuth: int = 360, n_elevation: int = 90) -> QuadratureGrid:
    """Gauss-Legendre grid over the full sphere, az in [-pi, pi]."""
    xa, wa = leggauss(n_azimuth)
    xe, we = leggauss(n_elevation)
    az = xa * np.pi
    el = xe * (np.pi / 2)
    AZ, EL = np.meshgrid(az, el, indexing="ij")
    W = np.outer(wa * np.pi, we * (np.pi / 2)) * np.cos(EL)
    return QuadratureGrid(AZ.ravel(), EL.ravel(), W.ravel())


# ---------------------------------------------------------------------------
# Seeded counter-based random streams
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RngStream:
    """Counter-based (Philox) random stream keyed by (seed, stream id).

    Identical (seed, stream) pairs reproduce identical draw sequences;
    distinct stream ids give statistically independent streams, which lets
    Monte-Carlo trials be split across workers without coordination.
    """

    seed: int
    stream: int = 0

    def generator(self) -> Generator:
        key = np.array([self.seed & 0xFFFFFFFFFFFFFFFF,
                        self.stream & 0xFFFFFFFFFFFFFFFF], dtype=np.uint64)
        return Generator(Philox(key=key))

    def split(self, stream: int) -> "RngStream":
        return RngStream(self.seed, stream)


def complex_gaussian(n: int, stream: RngStream) -> np.ndarray:
    """n i.i.d. CN(0, 1) draws; deterministic for a fixed stream."""
    if n < 0:
        raise DomainError(f"n must be >= 0, got {n}")
    if n == 0:
        return np.zeros(0, dtype=complex)
    g = stream.generator().standard_normal((2, n))
    return (g[0] + 1j * g[1]) / np.sqrt(2.0)


# ---------------------------------------------------------------------------
# Special functions
# ---------------------------------------------------------------------------

def fresnel_cs(x: float) -> tuple[float, float]:
    """Fresnel integrals C(x) = int_0^x cos(pi t^2/2) dt and S(x) likewise.

    Evaluated by adaptive Gauss-Kronrod quadrature on [0, x] at 1e-12
    tolerance; the interval is subdivided per oscillation half-period so the
    adaptive rule never sees more than a few cycles at once.  Odd extension
    C(-x) = -C(x), S(-x) = -S(x) is applied for negative arguments.

    Absolute error <= 1e-10 over the tested range.
    """
    if not math.isfinite(x):
        raise DomainError(f"fresnel_cs requires finite x, got {x}")
    if x < 0:
        c, s = fresnel_cs(-x)
        return -c, -s
    if x == 0.0:
        return 0.0, 0.0
    # breakpoints where pi t^2 / 2 crosses multiples of pi: t = sqrt(2k)
    ks = np.arange(1, int(x * x / 2) + 1)
    pts = np.sqrt(2.0 * ks)
    edges = np.concatenate([[0.0], pts[pts < x], [x]])
    c = s = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        c += quad(lambda t: math.cos(math.pi * t * t / 2), lo, hi,
                  epsabs=1e-12, epsrel=1e-12)[0]
        s += quad(lambda t: math.sin(math.pi * t * t / 2), lo, hi,
                  epsabs=1e-12, epsrel=1e-12)[0]
    return c, s


def sinc(x) -> np.ndarray | float:
    """Normalized sinc sin(pi x)/(pi x) with sinc(0) = 1 exactly."""
    return np.sinc(x)


# ---------------------------------------------------------------------------
# Linear-algebra contracts (vetted dense routines behind checked interfaces)
# ---------------------------------------------------------------------------

def hermitian_eig(A: np.ndarray, tol: float = 1e-10):
    """Eigendecomposition of a Hermitian matrix, eigenvalues descending.

    Returns (eigenvalues, eigenvectors) with A = U diag(w) U^H and columns of
    U orthonormal.  Raises ContractError if A deviates from Hermitian by more
    than tol * ||A||.
    """
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ContractError(f"expected a square matrix, got shape {A.shape}")
    scale = np.linalg.norm(A)
    if scale > 0 and np.linalg.norm(A - A.conj().T) > tol * scale:
        raise ContractError("matrix is not Hermitian within tolerance")
    w, U = np.linalg.eigh(0.5 * (A + A.conj().T))
    return w[::-1], U[:, ::-1]


def svd(A: np.ndarray):
    """Singular value decomposition A = U diag(s) V^H, s descending."""
    A = np.asarray(A)
    if not np.all(np.isfinite(A)):
        raise DomainError("svd requires finite entries")
    U, s, Vh = np.linalg.svd(A, full_matrices=False)
    return s, U, Vh.conj().T
