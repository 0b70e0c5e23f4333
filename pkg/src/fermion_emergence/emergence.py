"""Shell mode sums, the emergent profile in rest and boosted frames, and the
finite-difference Klein-Gordon residual."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from itertools import product
from pathlib import Path

import numpy as np

from .spinors import BoostParams, boost_spinor, rest_spinor

SERIES_R = 1e-6
EQ35 = "eq35"
EQ37 = "eq37"
SUBSTITUTION = "substitution"
LITERAL = "literal"


class RegionError(ValueError):
    pass


@dataclass(frozen=True)
class ShellSpec:
    """Shell |k| = mu, Klein-Gordon mass (default mu) and mode frequency.

    ``omega`` defaults to sqrt(mu^2 + mass^2); set it to force another dispersion.
    """

    mu: float = 1.0
    mass: float | None = None
    omega: float | None = None
    order: int = 32
    L: float = 60.0

    def __post_init__(self):
        if self.mu <= 0:
            raise ValueError("mu must be positive")
        if self.order < 8:
            raise ValueError("quadrature order must be at least 8")
        if self.L <= 0:
            raise ValueError("box side must be positive")
        if self.mass is None:
            object.__setattr__(self, "mass", self.mu)
        if self.omega is None:
            object.__setattr__(self, "omega", math.sqrt(self.mu ** 2 + self.mass ** 2))
        if self.omega <= 0:
            raise ValueError("omega must be positive")

    @property
    def volume(self) -> float:
        return self.L ** 3


@dataclass(frozen=True)
class BoostedFrame:
    v: float

    def __post_init__(self):
        if not 0.0 <= self.v < 1.0:
            raise ValueError(f"boost velocity must lie in [0, 1), got {self.v}")

    @property
    def gamma(self) -> float:
        return 1.0 / math.sqrt(1.0 - self.v * self.v)

    def to_rest(self, z, t):
        """(z', t') = (gamma (z - v t), gamma (t - v z))."""
        g = self.gamma
        return g * (z - self.v * t), g * (t - self.v * z)

    def from_rest(self, zp, tp):
        g = self.gamma
        return g * (zp + self.v * tp), g * (tp + self.v * zp)


# -- shell averages ------------------------------------------------------------

@lru_cache(maxsize=None)
def _sphere_rule(order: int):
    c, w = np.polynomial.legendre.leggauss(order)
    nphi = 2 * order
    phi = 2 * np.pi * np.arange(nphi) / nphi
    s = np.sqrt(1.0 - c * c)
    dirs = np.stack([np.outer(s, np.cos(phi)), np.outer(s, np.sin(phi)),
                     np.outer(c, np.ones(nphi))], axis=-1).reshape(-1, 3)
    weights = np.repeat(w / (2.0 * nphi), nphi)
    dirs.setflags(write=False)
    weights.setflags(write=False)
    return dirs, weights


def shell_average(mu: float, x, order: int = 32) -> float:
    """Average of exp(i k.x) over |k| = mu: Gauss-Legendre in cos(theta) times
    an equispaced azimuth rule.  Analytic value sin(mu r)/(mu r)."""
    if order < 8:
        raise ValueError("quadrature order must be at least 8")
    dirs, w = _sphere_rule(order)
    vals = np.exp(1j * mu * (dirs @ np.asarray(x, dtype=float)))
    return float(np.real(w @ vals))


def spherical_sinc(mu: float, r):
    """sin(mu r) / (mu r)."""
    return radial_factor(mu, r) / mu


def radial_factor(mu: float, r):
    """sin(mu r) / r, with the three-term series below r = 1e-6."""
    r = np.asarray(r, dtype=float)
    small = r < SERIES_R
    safe = np.where(small, 1.0, r)
    mr2 = (mu * r) ** 2
    series = mu * (1.0 - mr2 / 6.0 + mr2 * mr2 / 120.0)
    out = np.where(small, series, np.sin(mu * safe) / safe)
    return out if out.ndim else float(out)


def lattice_shell_modes(mu: float, delta: float, L: float) -> np.ndarray:
    """Lattice momenta 2 pi n / L with | |k| - mu | <= delta."""
    if delta <= 0:
        raise ValueError("shell tolerance must be positive")
    nmax = int(math.ceil((mu + delta) * L / (2 * math.pi)))
    n = np.arange(-nmax, nmax + 1)
    N = np.stack(np.meshgrid(n, n, n, indexing="ij"), axis=-1).reshape(-1, 3)
    k = 2 * np.pi * N / L
    sel = np.abs(np.linalg.norm(k, axis=1) - mu) <= delta
    return k[sel]


def lattice_shell_sum(mu: float, delta: float, L: float, x) -> complex:
    """Mean of exp(i k.x) over the lattice band around |k| = mu."""
    ks = lattice_shell_modes(mu, delta, L)
    if len(ks) == 0:
        raise ValueError(f"no lattice modes within {delta} of |k| = {mu} for L = {L}; "
                         f"increase L or delta")
    return complex(np.mean(np.exp(1j * (ks @ np.asarray(x, dtype=float)))))


# -- profiles ------------------------------------------------------------------

def _amplitude(spec: ShellSpec, variant: str) -> float:
    base = 1.0 / math.sqrt(2.0 * spec.volume * spec.omega) / (2.0 * math.pi ** 2)
    if variant == EQ37:
        return base
    if variant == EQ35:
        return base * spec.mu / spec.omega
    raise ValueError(f"unknown profile variant {variant!r}")


def scalar_profile(spec: ShellSpec, r, t, variant: str = EQ37):
    """A sin(mu r)/r theta(t) sin(omega t); theta(0) = 0.

    ``eq37`` drops the mu/omega factor, ``eq35`` keeps it.
    """
    t = np.asarray(t, dtype=float)
    step = np.where(t > 0, 1.0, 0.0)
    val = _amplitude(spec, variant) * radial_factor(spec.mu, r) * step * np.sin(spec.omega * t)
    return val if np.ndim(val) else float(val)


def _split(points):
    p = np.asarray(points, dtype=float)
    return p[..., 0], p[..., 1], p[..., 2], p[..., 3]


def closed_form_profile(spec: ShellSpec, points, variant: str = EQ37) -> np.ndarray:
    """Rest-frame profile u^1 * scalar; ``points`` (..., 4) of (x, y, z, t)."""
    x, y, z, t = _split(points)
    r = np.sqrt(x * x + y * y + z * z)
    s = np.asarray(scalar_profile(spec, r, t, variant))
    return s[..., None] * rest_spinor(1)


def boosted_spinor_column(spec: ShellSpec, frame: BoostedFrame) -> np.ndarray:
    return boost_spinor(rest_spinor(1), BoostParams(frame.v), spec.mass)


def boost_profile(spec: ShellSpec, frame: BoostedFrame, points, variant: str = EQ37,
                  boost_variant: str = SUBSTITUTION) -> np.ndarray:
    """Profile seen from a frame in which the particle moves with +v along z.

    ``substitution`` evaluates the rest profile at z' = gamma(z - vt),
    t' = gamma(t - vz); ``literal`` uses rho^2 + gamma (z - vt)^2 under the root.
    """
    x, y, z, t = _split(points)
    zp, tp = frame.to_rest(z, t)
    if boost_variant == SUBSTITUTION:
        r = np.sqrt(x * x + y * y + zp * zp)
    elif boost_variant == LITERAL:
        r = np.sqrt(x * x + y * y + frame.gamma * (z - frame.v * t) ** 2)
    else:
        raise ValueError(f"unknown boost variant {boost_variant!r}")
    s = np.asarray(scalar_profile(spec, r, tp, variant))
    return s[..., None] * boosted_spinor_column(spec, frame)


def evaluate(spec: ShellSpec, points, frame: BoostedFrame | None = None,
             variant: str = EQ37, boost_variant: str = SUBSTITUTION) -> np.ndarray:
    if frame is None:
        return closed_form_profile(spec, points, variant)
    return boost_profile(spec, frame, points, variant, boost_variant)


# -- Klein-Gordon residual -----------------------------------------------------

_STENCIL = np.array([[0, 0, 0, 0]] + [s * e for e in np.eye(4, dtype=int) for s in (1, -1)],
                    dtype=float)


def _check_region(points, h, frame, boost_variant):
    frame = frame or BoostedFrame(0.0)
    pts = np.asarray(points, dtype=float)[:, None, :] + h * _STENCIL[None, :, :]
    x, y, z, t = pts[..., 0], pts[..., 1], pts[..., 2], pts[..., 3]
    zp, tp = frame.to_rest(z, t)
    radii = [np.sqrt(x * x + y * y + zp * zp)]
    if boost_variant == LITERAL:
        radii.append(np.sqrt(x * x + y * y + frame.gamma * (z - frame.v * t) ** 2))
    if np.any(tp <= 0):
        raise RegionError("stencil reaches the wavefront t' <= 0")
    if any(np.any(r < 3 * h) for r in radii):
        raise RegionError(f"stencil comes within 3h = {3 * h} of the origin")


def kg_residual(spec: ShellSpec, h: float, points, frame: BoostedFrame | None = None,
                variant: str = EQ37, boost_variant: str = SUBSTITUTION,
                relative: bool = False) -> float:
    """max over points and components of |(d_t^2 - laplacian + mass^2) phi| by
    central second differences with spacing h.

    ``relative`` divides by max |phi| over the same points.
    """
    points = np.asarray(points, dtype=float)
    _check_region(points, h, frame, boost_variant)
    pts = points[:, None, :] + h * _STENCIL[None, :, :]
    vals = evaluate(spec, pts, frame, variant, boost_variant)  # (P, 9, 4)
    c = vals[:, 0]
    d2 = [(vals[:, 1 + 2 * a] - 2 * c + vals[:, 2 + 2 * a]) / (h * h) for a in range(4)]
    box = d2[3] - d2[0] - d2[1] - d2[2]
    res = np.max(np.abs(box + spec.mass ** 2 * c))
    if relative:
        res = res / np.max(np.abs(c))
    return float(res)


def rest_region(frame: BoostedFrame | None = None, n: int = 4, r_range=(1.0, 3.0),
                t_range=(1.0, 3.0)) -> np.ndarray:
    """Sample points whose rest-frame coordinates satisfy r' in r_range, t' in t_range,
    mapped to the lab frame."""
    frame = frame or BoostedFrame(0.0)
    rng = np.random.default_rng(20240611)
    u = rng.normal(size=(n ** 3, 3))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    r = np.linspace(*r_range, n ** 3)
    tp = np.tile(np.linspace(*t_range, n), n ** 2)
    xyz = u * r[:, None]
    z, t = frame.from_rest(xyz[:, 2], tp)
    return np.column_stack([xyz[:, 0], xyz[:, 1], z, t])


@dataclass
class ResidualReport:
    levels: list[dict] = field(default_factory=list)
    slope: float = float("nan")
    variant: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)


def residual_convergence(spec: ShellSpec, hs, points, frame: BoostedFrame | None = None,
                         variant: str = EQ37, boost_variant: str = SUBSTITUTION,
                         relative: bool = False) -> ResidualReport:
    """Residual at each h and the least-squares slope of log(residual) vs log(h)."""
    res = [kg_residual(spec, h, points, frame, variant, boost_variant, relative) for h in hs]
    slope = float(np.polyfit(np.log(hs), np.log(res), 1)[0])
    return ResidualReport(
        [{"h": float(h), "max_residual": r} for h, r in zip(hs, res)], slope,
        {"profile": variant, "boost": boost_variant, "v": 0.0 if frame is None else frame.v,
         "mu": spec.mu, "mass": spec.mass, "omega": spec.omega, "relative": relative})


# -- sampled profiles and export -----------------------------------------------

def parse_grid(text: str) -> np.ndarray:
    """``x=-2:2:5,y=0,z=-2:2:5,t=1`` -> (N, 4) points, x slowest, t fastest.

    Each axis is a single value or start:stop:count (inclusive ends).
    """
    axes = {"x": [0.0], "y": [0.0], "z": [0.0], "t": [0.0]}
    for part in filter(None, (p.strip() for p in text.split(","))):
        name, _, spec = part.partition("=")
        name = name.strip()
        if name not in axes or not spec:
            raise ValueError(f"bad grid axis {part!r}")
        bits = spec.split(":")
        if len(bits) == 1:
            axes[name] = [float(bits[0])]
        elif len(bits) == 3:
            axes[name] = list(np.linspace(float(bits[0]), float(bits[1]), int(bits[2])))
        else:
            raise ValueError(f"bad grid axis {part!r}")
    return np.array(list(product(axes["x"], axes["y"], axes["z"], axes["t"])), dtype=float)


@dataclass(frozen=True, eq=False)
class FieldProfile:
    grid: np.ndarray
    values: np.ndarray
    provenance: str
    metadata: dict

    def write_csv(self, path) -> Path:
        path = Path(path)
        with path.open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["x", "y", "z", "t", "comp", "Re", "Im"])
            for p, val in zip(self.grid, self.values):
                for comp in range(val.shape[0]):
                    w.writerow([repr(float(p[0])), repr(float(p[1])), repr(float(p[2])),
                                repr(float(p[3])), comp + 1,
                                repr(float(val[comp].real)), repr(float(val[comp].imag))])
        return path

    def write_sidecar(self, path) -> Path:
        path = Path(path)
        meta = {"provenance": self.provenance, "points": int(len(self.grid)), **self.metadata}
        path.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        return path


def sample_profile(spec: ShellSpec, grid, frame: BoostedFrame | None = None,
                   variant: str = EQ37, boost_variant: str = SUBSTITUTION) -> FieldProfile:
    grid = np.asarray(grid, dtype=float)
    values = evaluate(spec, grid, frame, variant, boost_variant)
    meta = {"shell": asdict(spec), "profile_variant": variant}
    if frame is None:
        provenance = "closed-form"
    else:
        provenance = "boosted-closed-form"
        meta["frame"] = {"v": frame.v, "gamma": frame.gamma, "boost_variant": boost_variant}
    return FieldProfile(grid, values, provenance, meta)


def mode_sum_profile(spec: ShellSpec, grid, delta: float = 0.05) -> FieldProfile:
    """Rest profile with the angular factor taken from the lattice band sum
    instead of sin(mu r)/(mu r); radial-times-time amplitude as in the closed form."""
    grid = np.asarray(grid, dtype=float)
    vals = np.zeros((len(grid), 4), dtype=complex)
    ks = lattice_shell_modes(spec.mu, delta, spec.L)
    if len(ks) == 0:
        raise ValueError("empty lattice shell band")
    amp = _amplitude(spec, EQ37) * spec.mu
    for i, (x, y, z, t) in enumerate(grid):
        ang = np.mean(np.exp(1j * (ks @ np.array([x, y, z]))))
        tt = float(t)
        vals[i, 0] = amp * ang * (math.sin(spec.omega * tt) if tt > 0 else 0.0)
    return FieldProfile(grid, vals, "mode-sum", {"shell": asdict(spec), "delta": delta})
