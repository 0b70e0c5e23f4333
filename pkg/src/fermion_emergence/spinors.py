"""Dirac-representation matrices, the momentum-space Hamiltonian and spinor boosts.

Units: c = hbar = 1.  Velocities are fractions of c.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

I2 = np.eye(2, dtype=complex)
I4 = np.eye(4, dtype=complex)
SIGMA = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)
Z2 = np.zeros((2, 2), dtype=complex)

BETA = np.block([[I2, Z2], [Z2, -I2]])
ALPHA = tuple(np.block([[Z2, s], [s, Z2]]) for s in SIGMA)
GAMMA0 = BETA
GAMMA = tuple(BETA @ a for a in ALPHA)

ENERGY = "energy"
PAPER = "paper"


class DegenerateSpectrum(ValueError):
    pass


def rest_spinor(a: int) -> np.ndarray:
    """Rest-frame basis spinor u^a, a in 1..4 (unit vectors)."""
    if a not in (1, 2, 3, 4):
        raise ValueError("spinor index must be 1..4")
    u = np.zeros(4, dtype=complex)
    u[a - 1] = 1.0
    return u


def alpha_dot(k) -> np.ndarray:
    k = np.asarray(k, dtype=float)
    return k[0] * ALPHA[0] + k[1] * ALPHA[1] + k[2] * ALPHA[2]


def hamiltonian_k(k, m: float) -> np.ndarray:
    """h(k) = alpha.k + beta m."""
    if m < 0:
        raise ValueError("mass must be non-negative")
    return alpha_dot(k) + m * BETA


def energy(k, m: float) -> float:
    k = np.asarray(k, dtype=float)
    return math.sqrt(float(k @ k) + m * m)


def square_check(k, m: float, tol: float = 1e-12) -> bool:
    """h(k)^2 == (k^2 + m^2) I entrywise."""
    h = hamiltonian_k(k, m)
    return bool(np.max(np.abs(h @ h - energy(k, m) ** 2 * I4)) <= tol * max(1.0, energy(k, m) ** 2))


def energy_projectors(k, m: float) -> tuple[np.ndarray, np.ndarray]:
    """(P+, P-) = ((I + h/|E|)/2, (I - h/|E|)/2)."""
    e = energy(k, m)
    if e == 0.0:
        raise DegenerateSpectrum("k = 0 and m = 0: h vanishes, no energy sign split")
    hn = hamiltonian_k(k, m) / e
    return (I4 + hn) / 2, (I4 - hn) / 2


def covariance_k(k, m: float, sign_convention: str = ENERGY) -> np.ndarray:
    """Momentum-space vacuum covariance.

    ``energy``: P- - P+ = -h/|E| (annihilators kill the vacuum).
    ``paper``:  +h/|E|, the matrix as printed.
    """
    p_plus, p_minus = energy_projectors(k, m)
    if sign_convention == ENERGY:
        return p_minus - p_plus
    if sign_convention == PAPER:
        return p_plus - p_minus
    raise ValueError(f"unknown sign convention {sign_convention!r}")


@dataclass(frozen=True)
class BoostParams:
    """Boost along +z with speed ``velocity`` (|v| < 1)."""

    velocity: float

    def __post_init__(self):
        if not abs(self.velocity) < 1.0:
            raise ValueError(f"|v| must be < 1, got {self.velocity}")

    @property
    def rapidity(self) -> float:
        return math.atanh(self.velocity)

    @property
    def gamma(self) -> float:
        return 1.0 / math.sqrt(1.0 - self.velocity ** 2)


def boost_matrix_rapidity(rapidity: float) -> np.ndarray:
    """S = cosh(w/2) I + sinh(w/2) alpha_z  (= exp(w alpha_z / 2), since alpha_z^2 = I)."""
    half = rapidity / 2
    return math.cosh(half) * I4 + math.sinh(half) * ALPHA[2]


def boost_matrix(b: BoostParams) -> np.ndarray:
    return boost_matrix_rapidity(b.rapidity)


def boost_spinor(u, b: BoostParams, m: float = 1.0) -> np.ndarray:
    """Boost a rest-frame spinor so the particle moves with velocity +v along z.

    For u^1 this gives sqrt((E+m)/2m) [1, 0, p/(E+m), 0].  ``m`` only sets the
    momentum scale for callers; S itself depends on the rapidity alone.
    """
    if m <= 0:
        raise ValueError("boosting needs a positive mass")
    return boost_matrix(b) @ np.asarray(u, dtype=complex)


def boosted_momentum(b: BoostParams, m: float) -> tuple[float, float]:
    """(E, p_z) = (gamma m, gamma m v)."""
    return b.gamma * m, b.gamma * m * b.velocity


def format_matrix(mat: np.ndarray) -> str:
    """Row-major complex text, one row per line."""
    return "\n".join(" ".join(f"{z.real:+.15g}{z.imag:+.15g}j" for z in row) for row in np.atleast_2d(mat))
