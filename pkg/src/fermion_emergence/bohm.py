"""Polar split of spinor values and the mode trajectory  dq/dt = 1 / (2 i conj(q)).

Writing q = r e^{i theta} gives dr/dt = 0 and dtheta/dt = -1 / (2 r^2), so every
trajectory is  q(t) = q0 exp(-i t / (2 |q0|^2)).  The branch q0 = 1/sqrt(2 omega)
is the one rotating at the mode frequency omega.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import sympy

from .grassmann import GrassmannElement
from .spinors import BETA
from .vacuum import CANONICAL, BosonizedState, FunctionalState, bosonize, ordering_sign

SINGULAR = 1e-8


class SingularTrajectory(RuntimeError):
    pass


@dataclass(frozen=True)
class PolarDecomposition:
    R: float
    S: float
    phi: np.ndarray

    def reassemble(self) -> np.ndarray:
        return self.R * np.exp(1j * self.S) * self.phi


def polar_decompose(psi, norm: str = "dirac") -> PolarDecomposition:
    """psi^a = R e^{iS} phi^a.

    S is the phase of the largest-magnitude component (lowest index on ties),
    so that component of phi is real and positive.  R is sqrt|psi-bar psi|, the
    frame-independent amplitude, falling back to the Euclidean norm when
    psi-bar psi vanishes; ``norm="euclidean"`` forces the latter.
    """
    psi = np.asarray(psi, dtype=complex)
    mags = np.abs(psi)
    top = mags.max()
    if top == 0.0:
        raise ValueError("zero spinor has no phase")
    j = int(np.flatnonzero(mags >= top * (1 - 1e-12))[0])
    S = float(np.angle(psi[j]))
    R = float(np.linalg.norm(psi))
    if norm == "dirac" and psi.size == 4:
        bilinear = abs((psi.conj() @ BETA @ psi).real)
        if bilinear > 1e-12 * R * R:
            R = math.sqrt(bilinear)
    elif norm != "euclidean" and norm != "dirac":
        raise ValueError(f"unknown norm {norm!r}")
    return PolarDecomposition(R, S, psi * np.exp(-1j * S) / R)


# -- trajectories ---------------------------------------------------------------

def guidance(q: complex) -> complex:
    return 1.0 / (2j * np.conj(q))


@dataclass(frozen=True, eq=False)
class ModeTrajectory:
    omega: float
    t: np.ndarray
    q: np.ndarray
    step: float
    k: tuple[float, float, float] | None = None

    def closed_form(self) -> np.ndarray:
        """A e^{-i omega t}, A = 1/sqrt(2 omega)."""
        return closed_form(self.omega, self.t)

    def exact(self) -> np.ndarray:
        """Exact solution through the recorded initial value."""
        q0 = self.q[0]
        return q0 * np.exp(-1j * self.t / (2 * abs(q0) ** 2))

    def write_csv(self, path) -> Path:
        path = Path(path)
        with path.open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", "re_q", "im_q", "abs_q", "arg_q"])
            for t, q in zip(self.t, self.q):
                w.writerow([repr(float(t)), repr(float(q.real)), repr(float(q.imag)),
                            repr(float(abs(q))), repr(float(np.angle(q)))])
        return path


def amplitude(omega: float) -> float:
    return 1.0 / math.sqrt(2.0 * omega)


def closed_form(omega: float, t) -> np.ndarray:
    return amplitude(omega) * np.exp(-1j * omega * np.asarray(t, dtype=float))


def integrate_trajectory(q0: complex, omega: float, T: float, dt: float,
                         k=None) -> ModeTrajectory:
    """Classical fixed-step RK4 for dq/dt = 1/(2 i conj q) on [0, T].

    The step is shrunk to T/N with N = ceil(T/dt) so the last sample sits at T.
    """
    if abs(q0) < 1e-6:
        raise ValueError(f"|q0| = {abs(q0):.3g} is too close to the singular point q = 0")
    if T <= 0 or dt <= 0:
        raise ValueError("horizon and step must be positive")
    if dt > T / 1000 * (1 + 1e-12):
        raise ValueError(f"dt = {dt} exceeds T/1000 = {T / 1000}")
    N = int(math.ceil(T / dt - 1e-9))
    h = T / N
    q = np.empty(N + 1, dtype=complex)
    q[0] = q0
    y = complex(q0)
    for i in range(N):
        k1 = 1.0 / (2j * y.conjugate())
        y2 = y + 0.5 * h * k1
        k2 = 1.0 / (2j * y2.conjugate())
        y3 = y + 0.5 * h * k2
        k3 = 1.0 / (2j * y3.conjugate())
        y4 = y + h * k3
        k4 = 1.0 / (2j * y4.conjugate())
        y = y + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        if abs(y) < SINGULAR:
            raise SingularTrajectory(f"|q| fell below {SINGULAR} at t = {(i + 1) * h}")
        q[i + 1] = y
    t = np.linspace(0.0, T, N + 1)
    return ModeTrajectory(float(omega), t, q, h, None if k is None else tuple(map(float, k)))


def verify_closed_form(omega: float, T: float, dt: float = 1e-3) -> float:
    """max |q_numeric - A e^{-i omega t}| starting from q(0) = A."""
    if omega <= 0:
        raise ValueError("omega must be positive")
    traj = integrate_trajectory(amplitude(omega), omega, T, dt)
    return float(np.max(np.abs(traj.q - traj.closed_form())))


def convergence_orders(omega: float, T: float, dts) -> tuple[list[float], list[float]]:
    """Errors against the closed form for each dt, and the log2 slopes between them."""
    errs = [verify_closed_form(omega, T, dt) for dt in dts]
    slopes = [math.log(errs[i] / errs[i + 1]) / math.log(dts[i] / dts[i + 1])
              for i in range(len(errs) - 1)]
    return errs, slopes


# -- guidance equation from the state's phase ---------------------------------

def mode_symbols(n: int, names=("q", "qd")):
    plain = sympy.symbols(f"{names[0]}0:{n}")
    dag = sympy.symbols(f"{names[1]}0:{n}")
    return list(plain), list(dag)


def grassmann_to_sympy(x: GrassmannElement, plain, dag, ordering: str = CANONICAL):
    """Formal image of a Grassmann polynomial: each monomial read in ``ordering``
    and written with the given placeholder symbols."""
    expr = sympy.Integer(0)
    for mask, c in x.terms.items():
        gens = x.generators_of(mask)
        mono = sympy.Integer(1)
        for g in gens:
            mono *= dag[g.mode] if g.kind == "bar" else plain[g.mode]
        expr += sympy.sympify(ordering_sign(gens, ordering) * c) * mono
    return expr


def _conjugate_swap(expr, plain, dag):
    swap = {**{p: d for p, d in zip(plain, dag)}, **{d: p for p, d in zip(plain, dag)}}
    return expr.xreplace({sympy.I: -sympy.I}).xreplace(swap)


def phase_rhs(prefactor, exponent, E0: float, plain, dag, mode: int):
    """dq_j/dt = dS/dq^dag_j with S = (log Psi - log Psi-bar) / 2i and
    Psi = prefactor * exp(exponent - i E0 t)."""
    t = sympy.Symbol("t", real=True)
    log_psi = sympy.log(prefactor) + exponent - sympy.I * sympy.sympify(E0) * t
    S = (log_psi - _conjugate_swap(log_psi, plain, dag)) / (2 * sympy.I)
    return sympy.simplify(sympy.diff(S, dag[mode]))


def guidance_rhs_grassmann(state: FunctionalState, mode: int, ordering: str = CANONICAL):
    """Right-hand side generated before the eta -> q map, in symbols eta / etad."""
    if state.excitation is None:
        raise ValueError("state carries no single-particle excitation")
    plain, dag = mode_symbols(state.n, ("eta", "etad"))
    pre = grassmann_to_sympy(state.excitation, plain, dag, ordering)
    expo = grassmann_to_sympy(state.exponent, plain, dag, ordering)
    return phase_rhs(pre, expo, state.E0, plain, dag, mode), (plain, dag)


def guidance_rhs_bosonic(state: BosonizedState | FunctionalState, mode: int,
                         ordering: str = CANONICAL):
    """Right-hand side generated after the eta -> q map, in symbols q / qd."""
    if isinstance(state, FunctionalState):
        state = bosonize(state, ordering)
    if state.excitation is None:
        raise ValueError("state carries no single-particle excitation")
    plain, dag = mode_symbols(state.basis.size)
    pre = state.excitation.to_sympy(dag, plain)
    expo = state.exponent.to_sympy(dag, plain)
    return phase_rhs(pre, expo, state.E0, plain, dag, mode), (plain, dag)


def literal_guidance(mode: int, n: int):
    """1 / (2 i q^dag_j) as printed."""
    plain, dag = mode_symbols(n)
    return 1 / (2 * sympy.I * dag[mode])


def order_independent(state: FunctionalState, mode: int, ordering: str = CANONICAL) -> bool:
    """The pre-map right-hand side, renamed eta -> q, equals the post-map one."""
    pre, (ep, ed) = guidance_rhs_grassmann(state, mode, ordering)
    post, (qp, qd) = guidance_rhs_bosonic(state, mode, ordering)
    renamed = pre.xreplace({**dict(zip(ep, qp)), **dict(zip(ed, qd))})
    return sympy.simplify(renamed - post) == 0
