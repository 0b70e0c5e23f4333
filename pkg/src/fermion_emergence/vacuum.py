"""Gaussian vacuum functionals on a truncated mode set.

Each Grassmann mode of the algebra is one single-particle degree of freedom.
A ``ModeBasis`` either uses energy eigenmodes directly as generators
(``representation="energy"``) or uses the four spinor components at each
lattice momentum (``representation="spinor"``); ``vectors`` holds the
single-particle eigenvectors in generator coordinates, column per mode.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import grassmann as gr
from .grassmann import GrassmannElement, bar, eta
from .spinors import ENERGY, PAPER, covariance_k, energy, hamiltonian_k

SQRT2 = math.sqrt(2.0)


class PauliExclusion(ValueError):
    """Creating a fermion in an occupied mode gives the zero state."""


@dataclass(frozen=True)
class Mode:
    n: tuple[int, int, int]
    branch: int
    energy: float


@dataclass(frozen=True, eq=False)
class ModeBasis:
    L: float
    mass: float
    modes: tuple[Mode, ...]
    vectors: np.ndarray
    hamiltonian: np.ndarray
    representation: str = "energy"

    @property
    def volume(self) -> float:
        return self.L ** 3

    @property
    def size(self) -> int:
        return len(self.modes)

    def k(self, mode: int) -> np.ndarray:
        return 2 * np.pi * np.asarray(self.modes[mode].n, dtype=float) / self.L

    @property
    def energies(self) -> np.ndarray:
        return np.array([m.energy for m in self.modes], dtype=float)

    @classmethod
    def lattice(cls, ns: Iterable[Sequence[int]], L: float, m: float,
                representation: str = "energy") -> "ModeBasis":
        """Four eigenmodes of h(k) per lattice vector k = 2 pi n / L."""
        ns = [tuple(int(c) for c in n) for n in ns]
        if L <= 0:
            raise ValueError("box side must be positive")
        modes = []
        blocks_h, blocks_v = [], []
        for n in ns:
            k = 2 * np.pi * np.asarray(n, dtype=float) / L
            if energy(k, m) == 0.0:
                raise ValueError(f"lattice vector {n} with m=0 has no energy sign")
            E, U = np.linalg.eigh(hamiltonian_k(k, m))
            for b in range(4):
                modes.append(Mode(n, b, float(E[b])))
            blocks_h.append(hamiltonian_k(k, m))
            blocks_v.append(U)
        dim = 4 * len(ns)
        if representation == "energy":
            vectors = np.eye(dim, dtype=complex)
            ham = np.diag([md.energy for md in modes]).astype(complex)
        elif representation == "spinor":
            vectors = _block_diag(blocks_v, dim)
            ham = _block_diag(blocks_h, dim)
        else:
            raise ValueError(f"unknown representation {representation!r}")
        return cls(L, m, tuple(modes), vectors, ham, representation)

    @classmethod
    def single(cls, energies: Sequence[float], L: float = 1.0) -> "ModeBasis":
        """Bare modes with prescribed single-particle energies (energy representation)."""
        modes = tuple(Mode((0, 0, 0), i, float(e)) for i, e in enumerate(energies))
        dim = len(modes)
        return cls(L, 0.0, modes, np.eye(dim, dtype=complex),
                   np.diag(np.asarray(energies, dtype=float)).astype(complex))

    def covariance(self, sign_convention: str = ENERGY) -> np.ndarray:
        """Omega = V diag(-sign E) V^dag (energy) or its negative (``paper``)."""
        if sign_convention not in (ENERGY, PAPER):
            raise ValueError(f"unknown sign convention {sign_convention!r}")
        E = self.energies
        if np.any(E == 0):
            raise ValueError("zero-energy mode: covariance sign undefined")
        s = -np.sign(E) if sign_convention == ENERGY else np.sign(E)
        V = self.vectors
        return V @ np.diag(s) @ V.conj().T

    def sqrt_form_covariance(self) -> np.ndarray:
        """Omega = -|E| per eigenmode: the exponent  -psi^dag sqrt(-Laplacian + m^2) psi."""
        V = self.vectors
        return -(V @ np.diag(np.abs(self.energies)) @ V.conj().T)


def _block_diag(blocks, dim):
    out = np.zeros((dim, dim), dtype=complex)
    for i, b in enumerate(blocks):
        out[4 * i:4 * i + 4, 4 * i:4 * i + 4] = b
    return out


@dataclass(frozen=True, eq=False)
class FunctionalState:
    basis: ModeBasis
    covariance: np.ndarray
    exponent: GrassmannElement
    body: GrassmannElement
    E0: float
    excitation: GrassmannElement | None = None
    occupied: tuple[int, ...] = field(default_factory=tuple)

    @property
    def n(self) -> int:
        return self.basis.size

    @property
    def is_vacuum(self) -> bool:
        return not self.occupied

    def phase(self, t: float) -> complex:
        return cmath.exp(-1j * self.E0 * t)

    def norm(self) -> float:
        """det(1 + Omega^dag Omega) of the Gaussian part (N = 1)."""
        return gr.state_norm_formula(self.covariance)

    def dump(self) -> str:
        return self.body.dump()


def build_vacuum(basis: ModeBasis, omega: np.ndarray | None = None,
                 sign_convention: str = ENERGY) -> FunctionalState:
    """exp(eta^dag Omega eta) with phase -E0 t, E0 = Tr h (1 + Omega) / 2."""
    if omega is None:
        omega = basis.covariance(sign_convention)
    omega = np.atleast_2d(np.asarray(omega, dtype=complex))
    if omega.shape != (basis.size, basis.size):
        raise ValueError(f"covariance shape {omega.shape} does not match {basis.size} modes")
    expo = gr.bilinear(basis.size, omega)
    e0 = 0.5 * np.trace(basis.hamiltonian @ (np.eye(basis.size) + omega))
    return FunctionalState(basis, omega, expo, gr.grassmann_exp(expo), float(e0.real))


# -- field operators ------------------------------------------------------------

def _left(g, x: GrassmannElement) -> GrassmannElement:
    return GrassmannElement.generator(x.n, g) * x


def _psi_raw(x: GrassmannElement, alpha: int) -> GrassmannElement:
    return _left(eta(alpha), x) + gr.derivative(x, bar(alpha))


def _psi_dag_raw(x: GrassmannElement, alpha: int) -> GrassmannElement:
    return _left(bar(alpha), x) + gr.derivative(x, eta(alpha))


def psi(x: GrassmannElement, alpha: int) -> GrassmannElement:
    """psi_alpha = (eta_alpha + d/d eta^dag_alpha) / sqrt 2."""
    return _psi_raw(x, alpha) / SQRT2


def psi_dag(x: GrassmannElement, alpha: int) -> GrassmannElement:
    """psi^dag_alpha = (eta^dag_alpha + d/d eta_alpha) / sqrt 2."""
    return _psi_dag_raw(x, alpha) / SQRT2


def anticommutator(x: GrassmannElement, n_mode: int, m_mode: int) -> GrassmannElement:
    """{psi_n, psi^dag_m} applied to x.

    The two 1/sqrt 2 factors are folded into one exact 1/2 so integer
    coefficients stay exact.
    """
    raw = (_psi_raw(_psi_dag_raw(x, m_mode), n_mode)
           + _psi_dag_raw(_psi_raw(x, n_mode), m_mode))
    return raw * 0.5


def _combine(x, coeffs, op):
    out = GrassmannElement.zero(x.n)
    for alpha, c in enumerate(coeffs):
        if abs(c) > 0:
            out = out + op(x, alpha) * complex(c)
    return out


def apply_annihilator(basis: ModeBasis, mode: int, x: GrassmannElement) -> GrassmannElement:
    """a_j = sum conj(u_j) psi for E_j > 0;  b_j = sum v_j psi^dag for E_j < 0."""
    v = basis.vectors[:, mode]
    if basis.modes[mode].energy > 0:
        return _combine(x, v.conj(), psi)
    return _combine(x, v, psi_dag)


def apply_creator(basis: ModeBasis, mode: int, x: GrassmannElement) -> GrassmannElement:
    v = basis.vectors[:, mode]
    if basis.modes[mode].energy > 0:
        return _combine(x, v, psi_dag)
    return _combine(x, v.conj(), psi)


def annihilation_check(state: FunctionalState, mode: int, tol: float = 1e-12) -> bool:
    """True when the mode's annihilator maps the state to zero."""
    return apply_annihilator(state.basis, mode, state.body).max_abs() < tol


def excitation_factor(state: FunctionalState, mode: int) -> GrassmannElement:
    """Linear form L with  a^dag_j Psi0 / sqrt V = L Psi0, read off the covariance."""
    basis, omega, n = state.basis, state.covariance, state.n
    v = basis.vectors[:, mode]
    scale = 1.0 / math.sqrt(2.0 * basis.volume)
    if basis.modes[mode].energy > 0:
        c = (np.eye(n) - omega) @ v
        gens = [bar(b) for b in range(n)]
    else:
        c = (np.eye(n) + omega).T @ v.conj()
        gens = [eta(b) for b in range(n)]
    out = GrassmannElement.zero(n)
    for g, cb in zip(gens, c):
        out = out + GrassmannElement.generator(n, g, scale * cb)
    return out


def create_excitation(state: FunctionalState, mode: int) -> FunctionalState:
    """Apply a^dag_j / sqrt V (box normalisation of the creation operator).

    On the vacuum with the energy-consistent covariance this yields
    sqrt(2/V) u^a eta^dag_a exp(eta^dag Omega eta).
    """
    if mode in state.occupied:
        raise PauliExclusion(f"mode {mode} is already occupied")
    body = apply_creator(state.basis, mode, state.body) / math.sqrt(state.basis.volume)
    if body.max_abs() < 1e-12:
        raise PauliExclusion(f"creating mode {mode} annihilates the state")
    excitation = None
    if state.is_vacuum:
        excitation = excitation_factor(state, mode)
        if not body.allclose(excitation * state.body, 1e-10):
            raise AssertionError("operator action disagrees with the linear-form factor")
    return FunctionalState(state.basis, state.covariance, state.exponent, body, state.E0,
                           excitation, state.occupied + (mode,))


# -- vacuum energy --------------------------------------------------------------

def vacuum_energy(basis: ModeBasis, m: float | None = None) -> float:
    """-1/2 sum |E| over every single-particle mode of the basis."""
    m = basis.mass if m is None else m
    return -0.5 * sum(energy(basis.k(j), m) for j in range(basis.size))


def vacuum_energy_trace(basis: ModeBasis, m: float | None = None) -> float:
    """1/2 Tr(h Omega) with the 4x4 momentum-space h(k) and energy-consistent Omega(k),
    restricted per k to the branches present in the basis."""
    m = basis.mass if m is None else m
    groups: dict[tuple[int, int, int], list[int]] = {}
    for md in basis.modes:
        groups.setdefault(md.n, []).append(md.branch)
    total = 0.0
    for n, branches in groups.items():
        k = 2 * np.pi * np.asarray(n, dtype=float) / basis.L
        h = hamiltonian_k(k, m)
        omega = covariance_k(k, m, ENERGY)
        _, U = np.linalg.eigh(h)
        P = U[:, branches] @ U[:, branches].conj().T
        total += 0.5 * np.trace(P @ h @ omega).real
    return float(total)


def eigenvalue_energy(basis: ModeBasis, m: float | None = None) -> float:
    """-1/2 sum |eigenvalues of h(k)| from a direct eigensolve per k."""
    m = basis.mass if m is None else m
    total = 0.0
    groups: dict[tuple[int, int, int], list[int]] = {}
    for md in basis.modes:
        groups.setdefault(md.n, []).append(md.branch)
    for n, branches in groups.items():
        k = 2 * np.pi * np.asarray(n, dtype=float) / basis.L
        E = np.linalg.eigvalsh(hamiltonian_k(k, m))
        total += -0.5 * float(np.sum(np.abs(E[branches])))
    return total


# -- bosonization ---------------------------------------------------------------

def _mode_major_key(g) -> tuple[int, int]:
    return (g.mode, 0 if g.kind == gr.BAR else 1)


def mode_major_sign(gens) -> int:
    """Parity of sorting canonically ordered generators into mode-major order."""
    keys = [_mode_major_key(g) for g in gens]
    inv = sum(1 for i in range(len(keys)) for j in range(i + 1, len(keys)) if keys[i] > keys[j])
    return -1 if inv & 1 else 1


class BosonPolynomial:
    """Commuting polynomial in q^dag_0..q^dag_{n-1}, q_0..q_{n-1}.

    Keys are exponent tuples of length 2n in the order (q^dag..., q...).
    """

    __slots__ = ("n", "_terms")

    def __init__(self, n: int, terms=None):
        self.n = n
        self._terms = {tuple(k): complex(c) for k, c in (terms or {}).items() if c != 0}

    @property
    def terms(self) -> dict[tuple[int, ...], complex]:
        return dict(self._terms)

    def coefficient(self, qdag: Iterable[int] = (), q: Iterable[int] = ()) -> complex:
        key = [0] * (2 * self.n)
        for i in qdag:
            key[i] += 1
        for i in q:
            key[self.n + i] += 1
        return self._terms.get(tuple(key), 0j)

    def __mul__(self, other: "BosonPolynomial") -> "BosonPolynomial":
        out: dict = {}
        for ka, ca in self._terms.items():
            for kb, cb in other._terms.items():
                k = tuple(a + b for a, b in zip(ka, kb))
                out[k] = out.get(k, 0j) + ca * cb
        return BosonPolynomial(self.n, out)

    def __eq__(self, other):
        return isinstance(other, BosonPolynomial) and self.n == other.n and self._terms == other._terms

    __hash__ = None

    def evaluate(self, qdag, q) -> complex:
        vals = np.concatenate([np.asarray(qdag, dtype=complex), np.asarray(q, dtype=complex)])
        return complex(sum(c * np.prod(vals ** np.asarray(k)) for k, c in self._terms.items()))

    def to_sympy(self, qdag_syms, q_syms):
        import sympy
        syms = list(qdag_syms) + list(q_syms)
        expr = sympy.Integer(0)
        for k, c in self._terms.items():
            mono = sympy.Integer(1)
            for s, p in zip(syms, k):
                mono *= s ** p
            expr += sympy.sympify(c) * mono
        return expr

    def __str__(self):
        parts = []
        for k, c in sorted(self._terms.items()):
            names = [f"qd{i}" for i in range(self.n) for _ in range(k[i])]
            names += [f"q{i}" for i in range(self.n) for _ in range(k[self.n + i])]
            parts.append(f"({c:.15g})" + "".join("*" + s for s in names))
        return " + ".join(parts) or "0"


CANONICAL = "canonical"
FOCK = "fock"


def ordering_sign(gens, ordering: str) -> int:
    if ordering == CANONICAL:
        return 1
    if ordering == FOCK:
        return mode_major_sign(gens)
    raise ValueError(f"unknown ordering {ordering!r}")


def bosonize_element(x: GrassmannElement, ordering: str = CANONICAL) -> BosonPolynomial:
    """eta^dag -> q^dag, eta -> q, monomial by monomial.

    ``canonical`` reads each monomial in the algebra's storage order (all
    eta^dag before all eta), so  eta^dag Omega eta -> q^dag Omega q.
    ``fock`` reads it in mode-major order (eta^dag_0 eta_0 eta^dag_1 eta_1 ...),
    the ordering of the two-mode occupation table.  Either way the coefficient
    in the chosen order carries over unchanged.
    """
    out = {}
    for mask, c in x.terms.items():
        gens = x.generators_of(mask)
        key = [0] * (2 * x.n)
        for g in gens:
            key[g.mode if g.kind == gr.BAR else x.n + g.mode] = 1
        out[tuple(key)] = ordering_sign(gens, ordering) * c
    return BosonPolynomial(x.n, out)


def fermionize_element(p: BosonPolynomial, ordering: str = CANONICAL) -> GrassmannElement:
    """Inverse of ``bosonize_element`` on square-free polynomials."""
    n = p.n
    out = {}
    for key, c in p.terms.items():
        if any(e > 1 for e in key):
            raise ValueError("polynomial has a repeated variable; no Grassmann preimage")
        mask = 0
        for i, e in enumerate(key):
            if e:
                mask |= 1 << i  # q^dag_i at slot i, q_i at slot n+i: same layout as the algebra
        gens = GrassmannElement(n).generators_of(mask)
        out[mask] = ordering_sign(gens, ordering) * c
    return GrassmannElement(n, out)


@dataclass(frozen=True, eq=False)
class BosonizedState:
    basis: ModeBasis
    exponent: BosonPolynomial
    body: BosonPolynomial
    excitation: BosonPolynomial | None
    E0: float
    ordering: str = CANONICAL

    def wavefunction(self, qdag, q, t: float = 0.0) -> complex:
        """prefactor(q) * exp(q^dag Omega q) * exp(-i E0 t) with an ordinary exponential."""
        pre = 1.0 if self.excitation is None else self.excitation.evaluate(qdag, q)
        return pre * cmath.exp(self.exponent.evaluate(qdag, q)) * cmath.exp(-1j * self.E0 * t)


def bosonize(state: FunctionalState, ordering: str = CANONICAL) -> BosonizedState:
    exc = None if state.excitation is None else bosonize_element(state.excitation, ordering)
    return BosonizedState(state.basis, bosonize_element(state.exponent, ordering),
                          bosonize_element(state.body, ordering), exc, state.E0, ordering)


def overlap_kernel(n_pairs: int = 1) -> GrassmannElement:
    """<eta|eta'> = exp(eb eta' - eb' eta) summed over pairs; modes 0..p-1 unprimed,
    p..2p-1 primed."""
    n = 2 * n_pairs
    eye = np.eye(n_pairs)
    un, pr = range(n_pairs), range(n_pairs, n)
    return gr.grassmann_exp(gr.bilinear(n, eye, un, pr) - gr.bilinear(n, eye, pr, un))
