"""Check suite behind ``--command verify``.

Every check records the operations it exercises; ``OPERATIONS`` is the manifest
the coverage check compares against.
"""
from __future__ import annotations

import json
import math
import tempfile
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from . import bohm, emergence as em, grassmann as gr, spinors as sp, vacuum as vac

OPERATIONS = (
    "grassmann.multiply", "grassmann.grassmann_exp", "grassmann.berezin_integrate",
    "grassmann.functional_derivative", "grassmann.gaussian_dual", "grassmann.state_norm",
    "spinors.hamiltonian_k", "spinors.square_check", "spinors.energy_projectors",
    "spinors.covariance_k", "spinors.boost_spinor",
    "vacuum.build_vacuum", "vacuum.annihilation_check", "vacuum.create_excitation",
    "vacuum.vacuum_energy", "vacuum.bosonize",
    "bohm.polar_decompose", "bohm.integrate_trajectory", "bohm.verify_closed_form",
    "emergence.shell_average", "emergence.lattice_shell_sum", "emergence.closed_form_profile",
    "emergence.boost_profile", "emergence.kg_residual",
    "cli.run_verify", "cli.run_profile",
)

PASS = "pass"
FAIL = "fail"
DOCUMENTED_FAIL = "fail (documented discrepancy)"
DOCUMENTED_VARIANT = "non-convergent (documented variant outcome)"

DEFAULT_TOLERANCES = {
    "exact": 0.0,
    "norm_rtol": 1e-10,
    "clifford": 1e-14,
    "square": 1e-12,
    "eigen": 1e-10,
    "annihilation": 1e-12,
    "vacuum_energy": 1e-10,
    "boost": 1e-12,
    "trajectory": 1e-8,
    "rk_order": 0.2,
    "polar": 1e-12,
    "shell": 1e-10,
    "lattice": 2e-2,
    "kg_order": 0.1,
}


@dataclass
class VerifySettings:
    mu: float = 1.0
    box: float = 60.0
    dt: float = 1e-3
    horizon: float | None = None
    order: int = 32
    omega_sign: str = sp.ENERGY
    profile_variant: str = em.EQ37
    boost_variant: str = em.SUBSTITUTION
    velocity: float = 0.6
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))


@dataclass
class CheckResult:
    name: str
    ops: list[str]
    measured: float
    tolerance: float
    status: str
    detail: str = ""
    seconds: float = 0.0

    @property
    def blocking(self) -> bool:
        return self.status == FAIL


def _status(ok: bool) -> str:
    return PASS if ok else FAIL


# -- individual checks -----------------------------------------------------------

def check_kernel_identity(cfg):
    n = 2
    kernel = vac.overlap_kernel(1)
    E = gr.GrassmannElement
    expected = (E.scalar(n) + E.monomial(n, [gr.bar(0), gr.eta(1)])
                - E.monomial(n, [gr.bar(1), gr.eta(0)])
                + E.monomial(n, [gr.bar(0), gr.eta(0), gr.bar(1), gr.eta(1)]))
    diff = (kernel - expected).max_abs()
    return ["grassmann.grassmann_exp", "grassmann.multiply"], diff, cfg.tolerances["exact"], \
        gr.same_terms(kernel, expected), "exp(eb eta' - eb' eta) term by term"


def check_anticommutation(cfg):
    n = 3
    worst = 0.0
    for i in range(2 * n):
        for j in range(2 * n):
            gi = gr.GrassmannElement(n, {1 << i: 1})
            gj = gr.GrassmannElement(n, {1 << j: 1})
            worst = max(worst, (gi * gj + gj * gi).max_abs())
    return ["grassmann.multiply"], worst, cfg.tolerances["exact"], worst == 0.0, \
        "g h = -h g and g g = 0 on all generator pairs, n = 3"


def check_berezin_sign(cfg):
    c = 2.5 - 0.5j
    val = gr.berezin_integrate(gr.grassmann_exp(gr.bilinear(1, [[c]])), [gr.bar(0), gr.eta(0)])
    err = abs(val.scalar_part + c)
    return ["grassmann.berezin_integrate"], err, cfg.tolerances["exact"], err == 0.0, \
        "int d(eb) d(eta) exp(c eb eta) = -c"


def check_derivative_anticommutator(cfg):
    n = 2
    worst = 0.0
    for mask in range(1 << (2 * n)):
        x = gr.GrassmannElement(n, {mask: 1})
        for slot in range(2 * n):
            g = x.generators_of(1 << slot)[0]
            gx = gr.GrassmannElement.generator(n, g)
            out = gr.functional_derivative(gx * x, g) + gx * gr.functional_derivative(x, g)
            worst = max(worst, (out - x).max_abs())
    return ["grassmann.functional_derivative"], worst, cfg.tolerances["exact"], worst == 0.0, \
        "{d/dg, g} = 1 on all 16 monomials"


def check_gaussian_dual(cfg):
    worst = 0.0
    for om in (np.array([[-1.0]]), np.array([[2.0]]), -np.eye(2)):
        d = gr.gaussian_dual(om)
        worst = max(worst, abs(d.prefactor - d.brute_prefactor),
                    float(np.max(np.abs(d.exponent - d.brute_exponent))),
                    float(np.max(np.abs(d.exponent - np.linalg.inv(om.conj().T)))))
    return ["grassmann.gaussian_dual"], worst, 1e-12, worst < 1e-12, \
        "closed form vs Berezin integration"


def check_state_norm(cfg):
    rng = np.random.default_rng(7)
    worst = 0.0
    for n in (1, 2, 3):
        for _ in range(20):
            om = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
            f = gr.state_norm_formula(om)
            b = gr.state_norm_brute(om)
            worst = max(worst, abs(b - f) / abs(f))
    gr.state_norm(-np.eye(2))
    tol = cfg.tolerances["norm_rtol"]
    return ["grassmann.state_norm"], worst, tol, worst < tol, "60 random covariances, n = 1..3"


def check_clifford(cfg):
    worst = float(np.max(np.abs(sp.BETA @ sp.BETA - sp.I4)))
    for i in range(3):
        worst = max(worst, float(np.max(np.abs(sp.ALPHA[i] @ sp.BETA + sp.BETA @ sp.ALPHA[i]))))
        for j in range(3):
            ac = sp.ALPHA[i] @ sp.ALPHA[j] + sp.ALPHA[j] @ sp.ALPHA[i]
            worst = max(worst, float(np.max(np.abs(ac - 2 * (i == j) * sp.I4))))
    tol = cfg.tolerances["clifford"]
    return ["spinors.hamiltonian_k"], worst, tol, worst <= tol, "alpha/beta anticommutators"


def check_hamiltonian(cfg):
    rng = np.random.default_rng(11)
    worst = 0.0
    ok = True
    for _ in range(50):
        k = rng.normal(size=3) * 3
        m = abs(rng.normal()) * 2
        E = np.linalg.eigvalsh(sp.hamiltonian_k(k, m))
        w = sp.energy(k, m)
        worst = max(worst, float(np.max(np.abs(E - [-w, -w, w, w]))))
        ok &= sp.square_check(k, m)
    tol = cfg.tolerances["eigen"]
    return ["spinors.hamiltonian_k", "spinors.square_check"], worst, tol, ok and worst < tol, \
        "spectrum +-sqrt(k^2+m^2), h^2 = (k^2+m^2) I"


def check_projectors(cfg):
    worst = 0.0
    for k, m in (((0, 0, 1), 1.0), ((0.3, -1.2, 0.7), 0.5), ((0, 0, 0), 1.0)):
        pp, pm = sp.energy_projectors(k, m)
        worst = max(worst, float(np.max(np.abs(pp + pm - sp.I4))),
                    float(np.max(np.abs(pp @ pp - pp))), float(np.max(np.abs(pp @ pm))))
        for conv in (sp.ENERGY, sp.PAPER):
            om = sp.covariance_k(k, m, conv)
            worst = max(worst, float(np.max(np.abs(om @ om - sp.I4))))
    return ["spinors.energy_projectors", "spinors.covariance_k"], worst, 1e-12, worst < 1e-12, \
        "P+ + P- = I, idempotent, orthogonal; Omega^2 = I"


def check_boost_column(cfg):
    col = sp.boost_spinor(sp.rest_spinor(1), sp.BoostParams(0.6), 1.0)
    expected = np.array([math.sqrt(1.125), 0, math.sqrt(1.125) / 3, 0])
    err = float(np.max(np.abs(col - expected)))
    E, p = sp.boosted_momentum(sp.BoostParams(0.6), 1.0)
    eig = float(np.max(np.abs(sp.hamiltonian_k((0, 0, p), 1.0) @ col - E * col)))
    tol = cfg.tolerances["boost"]
    return ["spinors.boost_spinor"], max(err, eig), tol, max(err, eig) < tol, \
        "v = 0.6 column sqrt(1.125) [1, 0, 1/3, 0]"


def check_field_anticommutator(cfg):
    n = 2
    worst = 0.0
    for mask in range(16):
        x = gr.GrassmannElement(n, {mask: 1})
        for a in range(n):
            for b in range(n):
                out = vac.anticommutator(x, a, b)
                worst = max(worst, (out - (x if a == b else gr.GrassmannElement.zero(n))).max_abs())
    return ["vacuum.build_vacuum"], worst, cfg.tolerances["exact"], worst == 0.0, \
        "{psi_n, psi^dag_m} = delta on 16 monomials"


def check_annihilation(cfg):
    basis = vac.ModeBasis.lattice([(0, 0, 0), (0, 0, 1)], cfg.box, cfg.mu)
    state = vac.build_vacuum(basis, sign_convention=cfg.omega_sign)
    worst = max(vac.apply_annihilator(basis, j, state.body).max_abs() for j in range(basis.size))
    ok = all(vac.annihilation_check(state, j) for j in range(basis.size))
    tol = cfg.tolerances["annihilation"]
    return ["vacuum.build_vacuum", "vacuum.annihilation_check"], worst, tol, ok, \
        f"8-mode vacuum, covariance sign '{cfg.omega_sign}'"


def check_vacuum_energy(cfg):
    ns = [(0, 0, 0), (1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1), (1, 1, 1)]
    basis = vac.ModeBasis.lattice(ns, cfg.box, cfg.mu)
    direct = vac.vacuum_energy(basis)
    trace = vac.vacuum_energy_trace(basis)
    eig = vac.eigenvalue_energy(basis)
    # the functional state itself is only built for the first two momenta (8 modes)
    small = vac.build_vacuum(vac.ModeBasis.lattice(ns[:2], cfg.box, cfg.mu))
    err = max(abs(direct - trace), abs(direct - eig), abs(vac.vacuum_energy(small.basis) - small.E0))
    tol = cfg.tolerances["vacuum_energy"]
    return ["vacuum.vacuum_energy"], err, tol, err < tol, \
        "-1/2 sum |E| vs 1/2 Tr(h Omega) on 8 lattice momenta"


def check_excitation(cfg):
    basis = vac.ModeBasis.lattice([(0, 0, 1)], cfg.box, cfg.mu, "spinor")
    state = vac.build_vacuum(basis)
    j = next(i for i, m in enumerate(basis.modes) if m.energy > 0)
    one = vac.create_excitation(state, j)
    u = basis.vectors[:, j]
    expected = gr.GrassmannElement.zero(basis.size)
    for a in range(4):
        expected = expected + gr.GrassmannElement.generator(basis.size, gr.bar(a), u[a])
    expected = expected * math.sqrt(2 / basis.volume) * state.body
    err = (one.body - expected).max_abs()
    try:
        vac.create_excitation(one, j)
        pauli = False
    except vac.PauliExclusion:
        pauli = True
    return ["vacuum.create_excitation"], err, 1e-12, pauli and err < 1e-12, \
        "a^dag vacuum = sqrt(2/V) u^a eta^dag_a exp(...); double creation excluded"


def check_bosonize(cfg):
    kernel = vac.bosonize_element(vac.overlap_kernel(1), vac.FOCK)
    ok = (kernel.coefficient() == 1 and kernel.coefficient([0], [1]) == 1
          and kernel.coefficient([1], [0]) == 1 and kernel.coefficient([0, 1], [0, 1]) == 1
          and len(kernel.terms) == 4)
    basis = vac.ModeBasis.lattice([(0, 0, 1)], cfg.box, cfg.mu)
    state = vac.build_vacuum(basis, basis.sqrt_form_covariance())
    expo = vac.bosonize(state).exponent
    for j, m in enumerate(basis.modes):
        ok &= abs(expo.coefficient([j], [j]) + abs(m.energy)) < 1e-15
    ok &= len(expo.terms) == basis.size
    sbasis = vac.ModeBasis.lattice([(0, 0, 1)], cfg.box, cfg.mu, "spinor")
    j = next(i for i, m in enumerate(sbasis.modes) if m.energy > 0)
    one = vac.create_excitation(vac.build_vacuum(sbasis), j)
    back = vac.fermionize_element(vac.bosonize_element(one.body))
    ok &= gr.same_terms(back, one.body)
    return ["vacuum.bosonize"], 0.0 if ok else 1.0, cfg.tolerances["exact"], ok, \
        "overlap kernel, vacuum exponent -omega q^dag q, coefficient round trip"


def check_polar(cfg):
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(20):
        psi = rng.normal(size=4) + 1j * rng.normal(size=4)
        pd = bohm.polar_decompose(psi)
        worst = max(worst, float(np.max(np.abs(pd.reassemble() - psi))))
    col = sp.boost_spinor(sp.rest_spinor(1), sp.BoostParams(0.6))
    pd = bohm.polar_decompose(np.exp(0.4j) * col)
    worst = max(worst, abs(pd.S - 0.4), float(np.max(np.abs(pd.phi - col))))
    tol = cfg.tolerances["polar"]
    return ["bohm.polar_decompose"], worst, tol, worst < tol, "reassembly and boosted-spinor phase"


def check_trajectory(cfg):
    omega = 1.0
    T = cfg.horizon or 10 * 2 * math.pi / omega
    err = bohm.verify_closed_form(omega, T, cfg.dt)
    tol = cfg.tolerances["trajectory"]
    return ["bohm.integrate_trajectory", "bohm.verify_closed_form"], err, tol, err < tol, \
        f"q(0) = 1/sqrt(2 omega), T = {T:.6g}, dt = {cfg.dt}"


def check_rk_order(cfg):
    errs, slopes = bohm.convergence_orders(1.0, 10.0, [0.01, 0.005, 0.0025])
    dev = max(abs(s - 4.0) for s in slopes)
    tol = cfg.tolerances["rk_order"]
    return ["bohm.verify_closed_form"], dev, tol, dev <= tol, \
        f"slopes {', '.join(f'{s:.3f}' for s in slopes)}"


def check_order_independence(cfg):
    basis = vac.ModeBasis.single([1.0], L=cfg.box)
    one = vac.create_excitation(vac.build_vacuum(basis), 0)
    import sympy
    post, _ = bohm.guidance_rhs_bosonic(one, 0)
    literal = sympy.simplify(post - bohm.literal_guidance(0, 1)) == 0
    ok = literal and bohm.order_independent(one, 0)
    return ["vacuum.bosonize"], 0.0 if ok else 1.0, cfg.tolerances["exact"], ok, \
        "dq/dt = 1/(2 i q^dag) before and after eta -> q"


def check_shell(cfg):
    rng = np.random.default_rng(5)
    worst = 0.0
    for r in np.linspace(0, 20 / cfg.mu, 81):
        d = rng.normal(size=3)
        d /= np.linalg.norm(d)
        worst = max(worst, abs(em.shell_average(cfg.mu, r * d, cfg.order) - em.spherical_sinc(cfg.mu, r)))
    tol = cfg.tolerances["shell"]
    return ["emergence.shell_average"], worst, tol, worst < tol, f"mu r in [0, 20], order {cfg.order}"


def check_lattice(cfg):
    val = em.lattice_shell_sum(cfg.mu, 0.05, cfg.box, [0, 0, 1.0])
    err = abs(val - em.spherical_sinc(cfg.mu, 1.0))
    tol = cfg.tolerances["lattice"]
    return ["emergence.lattice_shell_sum"], err, tol, err < tol, f"L = {cfg.box}, delta = 0.05, r = 1"


def _kg(cfg, frame, boost_variant, spec=None):
    spec = spec or em.ShellSpec(mu=cfg.mu, order=cfg.order, L=cfg.box)
    pts = em.rest_region(frame)
    return em.residual_convergence(spec, [0.1, 0.05, 0.025], pts, frame,
                                   cfg.profile_variant, boost_variant, relative=True)


def check_kg_rest(cfg):
    rep = _kg(cfg, None, em.SUBSTITUTION)
    dev = abs(rep.slope - 2.0)
    tol = cfg.tolerances["kg_order"]
    return ["emergence.kg_residual", "emergence.closed_form_profile"], dev, tol, dev <= tol, \
        f"slope {rep.slope:.4f}"


def check_kg_boosted(cfg):
    frame = em.BoostedFrame(cfg.velocity)
    rep = _kg(cfg, frame, cfg.boost_variant)
    dev = abs(rep.slope - 2.0)
    tol = cfg.tolerances["kg_order"]
    return ["emergence.kg_residual", "emergence.boost_profile"], dev, tol, dev <= tol, \
        f"v = {cfg.velocity}, {cfg.boost_variant}, slope {rep.slope:.4f}"


def check_kg_negative(cfg):
    spec = em.ShellSpec(mu=cfg.mu, omega=cfg.mu, order=cfg.order, L=cfg.box)
    rep = _kg(cfg, None, em.SUBSTITUTION, spec)
    res = [lv["max_residual"] for lv in rep.levels]
    # measured: finest relative residual; must stay O(1)
    return ["emergence.kg_residual"], res[-1], 0.1, res[-1] > 0.1 and abs(rep.slope) < 0.5, \
        "omega = mu: residual must not converge"


def check_boost_consistency(cfg):
    spec = em.ShellSpec(mu=cfg.mu, order=cfg.order, L=cfg.box)
    frame = em.BoostedFrame(0.6)
    ax = np.linspace(-2.0, 2.0, 10)
    grid = np.array([[x, y, z, 2.0] for x in ax for y in ax for z in ax])
    boosted = em.boost_profile(spec, frame, grid, cfg.profile_variant)
    g = frame.gamma
    zp = g * (grid[:, 2] - 0.6 * grid[:, 3])
    tp = g * (grid[:, 3] - 0.6 * grid[:, 2])
    rest = em.closed_form_profile(spec, np.column_stack([grid[:, 0], grid[:, 1], zp, tp]),
                                  cfg.profile_variant)
    S = sp.boost_matrix(sp.BoostParams(0.6))
    err = float(np.max(np.abs(boosted - rest @ S.T)))
    same = np.array_equal(em.boost_profile(spec, em.BoostedFrame(0.0), grid, cfg.profile_variant),
                          em.closed_form_profile(spec, grid, cfg.profile_variant))
    tol = cfg.tolerances["boost"]
    return ["emergence.boost_profile", "emergence.closed_form_profile"], err, tol, \
        same and err < tol, "boosted = S * rest(z', t') on a 10^3 grid; v = 0 identical"


def check_profile_determinism(cfg):
    from .cli import RunConfig, run_profile
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        base = dict(mu=cfg.mu, box=cfg.box, order=cfg.order, grid="x=-1:1:3,y=0,z=-2:2:5,t=1",
                    profile_variant=cfg.profile_variant)
        run_profile(RunConfig(command="profile", out=str(tmp / "a.csv"), **base))
        run_profile(RunConfig(command="profile", out=str(tmp / "b.csv"), **base))
        run_profile(RunConfig(command="boost-profile", velocity=0.0, out=str(tmp / "c.csv"), **base))
        a, b, c = ((tmp / f).read_bytes() for f in ("a.csv", "b.csv", "c.csv"))
    ok = a == b == c
    return ["cli.run_profile"], 0.0 if ok else 1.0, cfg.tolerances["exact"], ok, \
        "repeat run and v = 0 boost-profile are byte-identical"


CHECKS: list[tuple[str, Callable]] = [
    ("grassmann.kernel_identity", check_kernel_identity),
    ("grassmann.anticommutation", check_anticommutation),
    ("grassmann.berezin_sign", check_berezin_sign),
    ("grassmann.derivative_anticommutator", check_derivative_anticommutator),
    ("grassmann.gaussian_dual", check_gaussian_dual),
    ("grassmann.state_norm", check_state_norm),
    ("spinors.clifford", check_clifford),
    ("spinors.hamiltonian_spectrum", check_hamiltonian),
    ("spinors.projectors", check_projectors),
    ("spinors.boost_column", check_boost_column),
    ("vacuum.field_anticommutator", check_field_anticommutator),
    ("vacuum.annihilation", check_annihilation),
    ("vacuum.energy", check_vacuum_energy),
    ("vacuum.excitation", check_excitation),
    ("vacuum.bosonize", check_bosonize),
    ("bohm.polar", check_polar),
    ("bohm.closed_form", check_trajectory),
    ("bohm.rk4_order", check_rk_order),
    ("bohm.order_independence", check_order_independence),
    ("emergence.shell_sinc", check_shell),
    ("emergence.lattice_sum", check_lattice),
    ("emergence.kg_rest", check_kg_rest),
    ("emergence.kg_boosted", check_kg_boosted),
    ("emergence.kg_wrong_dispersion", check_kg_negative),
    ("emergence.boost_consistency", check_boost_consistency),
    ("cli.profile_determinism", check_profile_determinism),
]


def run_checks(cfg: VerifySettings | None = None) -> list[CheckResult]:
    cfg = cfg or VerifySettings()
    results = []
    for name, fn in CHECKS:
        start = time.perf_counter()
        try:
            ops, measured, tol, ok, detail = fn(cfg)
            status = _status(bool(ok))
        except Exception as exc:  # a crashing check is a failing check
            ops, measured, tol, status, detail = [], float("nan"), float("nan"), FAIL, repr(exc)
        if status == FAIL and name == "vacuum.annihilation" and cfg.omega_sign == sp.PAPER:
            status = DOCUMENTED_FAIL
        if status == FAIL and name == "emergence.kg_boosted" and cfg.boost_variant == em.LITERAL:
            status = DOCUMENTED_VARIANT
        results.append(CheckResult(name, list(ops), float(measured), float(tol), status, detail,
                                   time.perf_counter() - start))
    covered = {op for r in results for op in r.ops} | {"cli.run_verify"}
    missing = sorted(set(OPERATIONS) - covered)
    results.append(CheckResult("coverage", [], float(len(missing)), 0.0, _status(not missing),
                               "missing: " + ", ".join(missing) if missing else "all operations exercised"))
    return results


def report(results: list[CheckResult]) -> dict:
    return {
        "passed": not any(r.blocking for r in results),
        "checks": [asdict(r) for r in results],
    }


def report_json(results: list[CheckResult]) -> str:
    return json.dumps(report(results), indent=2, sort_keys=True, default=str)
