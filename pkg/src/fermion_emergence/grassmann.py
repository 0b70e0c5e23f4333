"""Finite complex Grassmann algebra over 2n generators.

Generators are numbered so that the n conjugate generators (eta-bar / eta-dagger)
come first, followed by the n plain generators.  A monomial is an int bitmask
over these 2n slots; bit order is the canonical product order.

Berezin integration uses  int d(theta) theta = 1,  int d(theta) 1 = 0, realised
as the left derivative.  A multiple integral  int d(g1) d(g2) ... d(gk) f  acts
with the rightmost differential first.  The measure D^2 eta = D eta^dagger D eta
is the ordered list  [bar_0 .. bar_{n-1}, eta_0 .. eta_{n-1}].
"""
from __future__ import annotations

import cmath
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

PRUNE = 1e-14

BAR = "bar"
ETA = "eta"


class GrassmannError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class Generator:
    """One anti-commuting generator: ``kind`` is "bar" (eta-dagger) or "eta"."""

    kind: str
    mode: int

    def __post_init__(self):
        if self.kind not in (BAR, ETA):
            raise GrassmannError(f"unknown generator kind {self.kind!r}")
        if self.mode < 0:
            raise GrassmannError("mode index must be non-negative")

    def slot(self, n: int) -> int:
        if self.mode >= n:
            raise GrassmannError(f"mode {self.mode} outside algebra with n={n}")
        return self.mode if self.kind == BAR else n + self.mode

    def __str__(self):
        return f"{'eb' if self.kind == BAR else 'e'}{self.mode}"


def bar(mode: int) -> Generator:
    return Generator(BAR, mode)


def eta(mode: int) -> Generator:
    return Generator(ETA, mode)


def _popcount(x: int) -> int:
    return bin(x).count("1")


def merge_sign(a: int, b: int) -> int:
    """Sign of reordering the concatenation  (monomial a)(monomial b)  canonically.

    Each generator of b must pass every generator of a that sits at a higher slot.
    Caller guarantees a & b == 0.
    """
    swaps = 0
    rest = b
    while rest:
        low = rest & -rest
        swaps += _popcount(a & ~((low << 1) - 1))
        rest ^= low
    return -1 if swaps & 1 else 1


class GrassmannElement:
    """Immutable element of the Grassmann algebra with ``n`` modes (2n generators)."""

    __slots__ = ("n", "_terms")

    def __init__(self, n: int, terms: Mapping[int, complex] | None = None):
        if n < 0:
            raise GrassmannError("mode count must be non-negative")
        self.n = n
        clean = {}
        if terms:
            full = (1 << (2 * n)) - 1
            for mask, c in terms.items():
                if mask & ~full:
                    raise GrassmannError(f"monomial {mask:b} outside algebra with n={n}")
                c = complex(c)
                if abs(c) >= PRUNE:
                    clean[mask] = c
        self._terms = clean

    # -- construction -----------------------------------------------------
    @classmethod
    def scalar(cls, n: int, value: complex = 1.0) -> "GrassmannElement":
        return cls(n, {0: value})

    @classmethod
    def zero(cls, n: int) -> "GrassmannElement":
        return cls(n)

    @classmethod
    def generator(cls, n: int, g: Generator, coeff: complex = 1.0) -> "GrassmannElement":
        return cls(n, {1 << g.slot(n): coeff})

    @classmethod
    def monomial(cls, n: int, gens: Iterable[Generator], coeff: complex = 1.0) -> "GrassmannElement":
        """Product  coeff * g1 g2 ... gk  in the written order."""
        out = cls.scalar(n, coeff)
        for g in gens:
            out = out * cls.generator(n, g)
        return out

    # -- inspection -------------------------------------------------------
    @property
    def terms(self) -> dict[int, complex]:
        return dict(self._terms)

    def coefficient(self, gens: Iterable[Generator] = ()) -> complex:
        """Coefficient of the monomial written as ``gens`` (in that order)."""
        gens = list(gens)
        mask = 0
        sign = 1
        for g in gens:
            bit = 1 << g.slot(self.n)
            if mask & bit:
                return 0j
            sign *= merge_sign(mask, bit)
            mask |= bit
        return sign * self._terms.get(mask, 0j)

    @property
    def scalar_part(self) -> complex:
        return self._terms.get(0, 0j)

    def is_zero(self, tol: float = PRUNE) -> bool:
        return all(abs(c) < tol for c in self._terms.values())

    def is_even(self) -> bool:
        return all(_popcount(m) % 2 == 0 for m in self._terms)

    def max_abs(self) -> float:
        return max((abs(c) for c in self._terms.values()), default=0.0)

    def generators_of(self, mask: int) -> list[Generator]:
        out = []
        for slot in range(2 * self.n):
            if mask >> slot & 1:
                out.append(bar(slot) if slot < self.n else eta(slot - self.n))
        return out

    def dump(self) -> str:
        """Debug text: one ``generators -> coefficient`` line per term, sorted."""
        lines = []
        for mask in sorted(self._terms, key=lambda m: (_popcount(m), m)):
            c = self._terms[mask]
            name = " ".join(str(g) for g in self.generators_of(mask)) or "1"
            lines.append(f"{name} -> {c.real:+.15g}{c.imag:+.15g}j")
        return "\n".join(lines)

    def __repr__(self):
        return f"GrassmannElement(n={self.n}, terms={len(self._terms)})"

    # -- arithmetic -------------------------------------------------------
    def _check(self, other: "GrassmannElement"):
        if not isinstance(other, GrassmannElement):
            return NotImplemented
        if other.n != self.n:
            raise GrassmannError(f"algebra mismatch: n={self.n} vs n={other.n}")
        return None

    def __add__(self, other):
        if isinstance(other, (int, float, complex)):
            other = GrassmannElement.scalar(self.n, other)
        self._check(other)
        terms = dict(self._terms)
        for m, c in other._terms.items():
            terms[m] = terms.get(m, 0j) + c
        return GrassmannElement(self.n, terms)

    __radd__ = __add__

    def __neg__(self):
        return GrassmannElement(self.n, {m: -c for m, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            return GrassmannElement(self.n, {m: c * other for m, c in self._terms.items()})
        self._check(other)
        return multiply(self, other)

    def __rmul__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            return self * other
        return NotImplemented

    def __truediv__(self, other):
        return self * (1.0 / other)

    def __eq__(self, other):
        if not isinstance(other, GrassmannElement) or other.n != self.n:
            return NotImplemented
        return (self - other).is_zero()

    __hash__ = None

    def allclose(self, other: "GrassmannElement", tol: float = 1e-12) -> bool:
        self._check(other)
        return (self - other).max_abs() < tol


def multiply(a: GrassmannElement, b: GrassmannElement) -> GrassmannElement:
    """Graded product; monomials sharing a generator vanish."""
    if a.n != b.n:
        raise GrassmannError(f"algebra mismatch: n={a.n} vs n={b.n}")
    out: dict[int, complex] = {}
    for ma, ca in a._terms.items():
        for mb, cb in b._terms.items():
            if ma & mb:
                continue
            m = ma | mb
            out[m] = out.get(m, 0j) + merge_sign(ma, mb) * ca * cb
    return GrassmannElement(a.n, out)


def grassmann_exp(a: GrassmannElement) -> GrassmannElement:
    """exp(a) with the scalar part exponentiated separately; the nilpotent rest
    is summed as a power series that terminates at order 2n."""
    s = a.scalar_part
    nil = a - s if s else a
    total = GrassmannElement.scalar(a.n, 1.0)
    power = GrassmannElement.scalar(a.n, 1.0)
    for k in range(1, 2 * a.n + 1):
        power = power * nil / k
        if power.is_zero():
            break
        total = total + power
    return total * cmath.exp(s) if s else total


def derivative(a: GrassmannElement, g: Generator, side: str = "left") -> GrassmannElement:
    """Graded derivative by ``g``.  Left: move g to the front first; right: to the back."""
    if side not in ("left", "right"):
        raise GrassmannError("side must be 'left' or 'right'")
    bit = 1 << g.slot(a.n)
    out = {}
    for m, c in a._terms.items():
        if not m & bit:
            continue
        if side == "left":
            passed = _popcount(m & (bit - 1))
        else:
            passed = _popcount(m & ~((bit << 1) - 1))
        out[m ^ bit] = -c if passed & 1 else c
    return GrassmannElement(a.n, out)


functional_derivative = derivative


def berezin_integrate(a: GrassmannElement, variables: Iterable[Generator]) -> GrassmannElement:
    """Iterated Berezin integral  int d(v1) ... d(vk) a  (innermost = last listed)."""
    variables = list(variables)
    if len(set(variables)) != len(variables):
        raise GrassmannError("repeated integration variable")
    out = a
    for g in reversed(variables):
        out = derivative(out, g, "left")
    return out


def measure(n: int, modes: Iterable[int] | None = None) -> list[Generator]:
    """D^2 eta = D eta^dagger D eta over ``modes`` (default all)."""
    modes = list(range(n)) if modes is None else list(modes)
    return [bar(i) for i in modes] + [eta(i) for i in modes]


def measure_sign(k: int) -> int:
    """Sign relating  D eta^dag D eta  to the paired measure  prod_i d(bar_i) d(eta_i)."""
    return -1 if (k * (k - 1) // 2) % 2 else 1


def bilinear(n: int, matrix: np.ndarray, row_modes: Iterable[int] | None = None,
             col_modes: Iterable[int] | None = None) -> GrassmannElement:
    """sum_ij  bar_{r_i} M_ij eta_{c_j}."""
    matrix = np.atleast_2d(np.asarray(matrix, dtype=complex))
    rows = list(range(matrix.shape[0])) if row_modes is None else list(row_modes)
    cols = list(range(matrix.shape[1])) if col_modes is None else list(col_modes)
    terms = {}
    for i, r in enumerate(rows):
        for j, c in enumerate(cols):
            if matrix[i, j] != 0:
                # bar slots precede eta slots, so bar_r eta_c is already canonical
                mask = (1 << bar(r).slot(n)) | (1 << eta(c).slot(n))
                terms[mask] = terms.get(mask, 0j) + matrix[i, j]
    return GrassmannElement(n, terms)


def gaussian(omega: np.ndarray) -> GrassmannElement:
    """exp(eta^dagger Omega eta) on the algebra with n = dim(Omega)."""
    omega = np.atleast_2d(np.asarray(omega, dtype=complex))
    return grassmann_exp(bilinear(omega.shape[0], omega))


@dataclass(frozen=True)
class GaussianDual:
    prefactor: complex
    exponent: np.ndarray
    brute_prefactor: complex
    brute_exponent: np.ndarray


def _dual_by_integration(omega: np.ndarray) -> GrassmannElement:
    """Psi*[eta] = int D^2 eta' exp(eb' eta - eb eta' + eb' Omega^dag eta') Psi-bar kernel.

    Unprimed modes are 0..n-1, primed modes n..2n-1 of a 2n-mode algebra.
    """
    n = omega.shape[0]
    big = 2 * n
    un = range(n)
    pr = range(n, 2 * n)
    eye = np.eye(n)
    expo = (bilinear(big, eye, pr, un) - bilinear(big, eye, un, pr)
            + bilinear(big, omega.conj().T, pr, pr))
    return berezin_integrate(grassmann_exp(expo), measure(big, pr))


def _read_gaussian(elem: GrassmannElement, n: int) -> tuple[complex, np.ndarray]:
    """Read (c, M) off  c * exp(eta^dag M eta)  living on modes 0..n-1."""
    c = elem.scalar_part
    if abs(c) < PRUNE:
        raise GrassmannError("element has no scalar part; not a Gaussian")
    M = np.zeros((n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            M[i, j] = elem.coefficient([bar(i), eta(j)]) / c
    return c, M


def gaussian_dual(omega: np.ndarray) -> GaussianDual:
    """Dual of exp(eta^dag Omega eta): closed form  s_n det(-Omega^dag) exp(eta^dag (Omega^dag)^-1 eta),
    cross-checked against explicit Berezin integration over a doubled algebra."""
    omega = np.atleast_2d(np.asarray(omega, dtype=complex))
    n = omega.shape[0]
    if abs(np.linalg.det(omega)) < 1e-12:
        raise GrassmannError("covariance is singular; dual is undefined")
    odag = omega.conj().T
    closed_exp = np.linalg.inv(odag)
    closed_pref = measure_sign(n) * np.linalg.det(-odag)

    dual = _dual_by_integration(omega)
    # dual lives on the unprimed modes of the doubled algebra; bar_i / eta_i slots
    # there are i and 2n+i, which coefficient() resolves through Generator.slot
    c, M = _read_gaussian(dual, n)
    expected = closed_pref * gaussian_on(2 * n, closed_exp)
    if not dual.allclose(expected, 1e-10 * max(1.0, abs(closed_pref))):
        raise GrassmannError("closed-form dual disagrees with Berezin integration")
    return GaussianDual(closed_pref, closed_exp, c, M)


def gaussian_on(n_total: int, matrix: np.ndarray, modes: Iterable[int] | None = None) -> GrassmannElement:
    """exp(eta^dag M eta) on a subset of modes of a bigger algebra."""
    matrix = np.atleast_2d(np.asarray(matrix, dtype=complex))
    modes = list(range(matrix.shape[0])) if modes is None else list(modes)
    return grassmann_exp(bilinear(n_total, matrix, modes, modes))


def state_norm_formula(omega: np.ndarray) -> float:
    omega = np.atleast_2d(np.asarray(omega, dtype=complex))
    n = omega.shape[0]
    return float(np.linalg.det(np.eye(n) + omega.conj().T @ omega).real)


def state_norm_brute(omega: np.ndarray) -> complex:
    """<Psi|Psi> = int D^2 eta Psi*[eta] Psi[eta] with Psi* from explicit integration."""
    omega = np.atleast_2d(np.asarray(omega, dtype=complex))
    n = omega.shape[0]
    big = 2 * n
    dual = _dual_by_integration(omega)
    psi = gaussian_on(big, omega)
    return berezin_integrate(dual * psi, measure(big, range(n))).scalar_part


def state_norm(omega: np.ndarray, rtol: float = 1e-10) -> float:
    """det(1 + Omega^dag Omega), asserted equal to the brute-force Berezin norm."""
    omega = np.atleast_2d(np.asarray(omega, dtype=complex))
    formula = state_norm_formula(omega)
    if omega.shape[0] == 0:
        return 1.0
    brute = state_norm_brute(omega)
    if abs(brute - formula) > rtol * max(1.0, abs(formula)):
        raise GrassmannError(f"norm mismatch: formula {formula} vs integration {brute}")
    return formula


def same_terms(a: GrassmannElement, b: GrassmannElement) -> bool:
    """Exact term-for-term equality of the coefficient maps."""
    return a.n == b.n and a.terms == b.terms

