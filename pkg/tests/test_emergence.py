from __future__ import annotations

import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fermion_emergence import emergence as em, spinors as sp

SPEC = em.ShellSpec()


def unit(v):
    v = np.asarray(v, dtype=float)
    return v / np.linalg.norm(v)


directions = st.lists(st.floats(-1, 1), min_size=3, max_size=3).filter(
    lambda v: np.linalg.norm(v) > 0.1).map(unit)


def test_defaults():
    assert SPEC.mass == 1.0 and SPEC.omega == pytest.approx(math.sqrt(2))
    assert SPEC.volume == 60.0 ** 3


# -- shell averages -------------------------------------------------------------------------

def test_sinc_at_origin():
    assert em.spherical_sinc(1.0, 0.0) == 1.0
    assert em.shell_average(1.0, [0, 0, 0]) == pytest.approx(1.0)


@given(st.floats(0, 20), directions)
def test_shell_average_is_sinc(r, d):
    assert abs(em.shell_average(1.0, r * d) - em.spherical_sinc(1.0, r)) < 1e-10


def test_radial_factor_series_branch():
    assert em.radial_factor(2.0, 1e-9) == pytest.approx(2.0)
    assert em.radial_factor(2.0, 1.0) == pytest.approx(math.sin(2.0))


def test_lattice_sum_r1():
    val = em.lattice_shell_sum(1.0, 0.05, 60.0, [0, 0, 1.0])
    assert abs(val - em.spherical_sinc(1.0, 1.0)) < 2e-2


def _lattice_error(L):
    rng = np.random.default_rng(1)
    errs = []
    for _ in range(20):
        x = 2.0 * unit(rng.normal(size=3))
        errs.append(abs(em.lattice_shell_sum(1.0, 3.0 / L, L, x) - em.spherical_sinc(1.0, 2.0)))
    return float(np.mean(errs))


def test_lattice_error_halves_with_box():
    errs = [_lattice_error(L) for L in (60.0, 120.0, 240.0)]
    for a, b in zip(errs, errs[1:]):
        assert 1.0 <= a / b <= 4.0


def test_empty_band_rejected():
    with pytest.raises(ValueError):
        em.lattice_shell_sum(1.0, 1e-6, 3.0, [0, 0, 1.0])


# -- closed-form profile --------------------------------------------------------------------

def test_profile_vanishes_before_and_at_zero_time():
    pts = np.array([[0, 0, 1.0, 0.0], [0, 0, 1.0, -1.0]])
    np.testing.assert_array_equal(em.closed_form_profile(SPEC, pts), 0)


def test_profile_value():
    r, t = 1.3, 0.7
    A = 1 / math.sqrt(2 * SPEC.volume * SPEC.omega) / (2 * math.pi ** 2)
    val = em.closed_form_profile(SPEC, [[0, r, 0, t]])
    expected = A * math.sin(r) / r * math.sin(SPEC.omega * t)
    assert val[0, 0] == pytest.approx(expected, rel=1e-14)
    np.testing.assert_array_equal(val[0, 1:], 0)


def test_eq35_variant_scales_by_mu_over_omega():
    p = [[0.3, 0.2, 0.1, 1.0]]
    ratio = em.closed_form_profile(SPEC, p, em.EQ35)[0, 0] / em.closed_form_profile(SPEC, p)[0, 0]
    assert ratio == pytest.approx(SPEC.mu / SPEC.omega)


def test_unknown_variant_rejected():
    with pytest.raises(ValueError):
        em.closed_form_profile(SPEC, [[0, 0, 1, 1]], "eq99")


# -- boosts -----------------------------------------------------------------------------------

def test_boosted_column():
    col = em.boosted_spinor_column(SPEC, em.BoostedFrame(0.6))
    np.testing.assert_allclose(col, [math.sqrt(1.125), 0, math.sqrt(1.125) / 3, 0], atol=1e-12)


def test_zero_boost_is_bitwise_rest():
    pts = em.parse_grid("x=-1:1:3,y=0.5,z=-2:2:5,t=0:2:3")
    np.testing.assert_array_equal(em.boost_profile(SPEC, em.BoostedFrame(0.0), pts),
                                  em.closed_form_profile(SPEC, pts))


@given(st.floats(0.05, 0.9))
def test_boost_is_substitution(v):
    frame = em.BoostedFrame(v)
    pts = np.array([[0.3, -0.2, z, 1.5] for z in np.linspace(-2, 2, 7)])
    zp, tp = frame.to_rest(pts[:, 2], pts[:, 3])
    rest = em.closed_form_profile(SPEC, np.column_stack([pts[:, 0], pts[:, 1], zp, tp]))
    S = sp.boost_matrix(sp.BoostParams(v))
    np.testing.assert_allclose(em.boost_profile(SPEC, frame, pts), rest @ S.T, atol=1e-15)


@given(st.floats(0.0, 0.9), st.floats(-3, 3), st.floats(-3, 3))
def test_frame_round_trip(v, z, t):
    f = em.BoostedFrame(v)
    zz, tt = f.from_rest(*f.to_rest(z, t))
    assert zz == pytest.approx(z, abs=1e-12) and tt == pytest.approx(t, abs=1e-12)


def test_boosted_peak_follows_particle():
    frame = em.BoostedFrame(0.6)
    t = frame.gamma * math.pi / (2 * SPEC.omega)
    zs = np.linspace(-3, 3, 6001)
    pts = np.column_stack([np.zeros_like(zs), np.zeros_like(zs), zs, np.full_like(zs, t)])
    vals = np.abs(em.boost_profile(SPEC, frame, pts)[:, 0])
    assert zs[np.argmax(vals)] == pytest.approx(0.6 * t, abs=1e-3)


@pytest.mark.parametrize("v", [1.0, -0.1])
def test_bad_velocity(v):
    with pytest.raises(ValueError):
        em.BoostedFrame(v)


# -- Klein-Gordon residual -----------------------------------------------------------------------

HS = [0.1, 0.05, 0.025]


def test_residual_second_order_at_rest():
    rep = em.residual_convergence(SPEC, HS, em.rest_region(), relative=True)
    assert abs(rep.slope - 2) < 0.1


def test_residual_second_order_eq35():
    rep = em.residual_convergence(SPEC, HS, em.rest_region(), variant=em.EQ35)
    assert abs(rep.slope - 2) < 0.1


def test_residual_second_order_boosted():
    frame = em.BoostedFrame(0.6)
    rep = em.residual_convergence(SPEC, HS, em.rest_region(frame), frame, relative=True)
    assert abs(rep.slope - 2) < 0.1


def test_wrong_dispersion_does_not_converge():
    spec = em.ShellSpec(omega=1.0)
    rep = em.residual_convergence(spec, HS, em.rest_region(), relative=True)
    assert min(lv["max_residual"] for lv in rep.levels) > 0.1


def test_literal_boost_does_not_converge():
    frame = em.BoostedFrame(0.6)
    rep = em.residual_convergence(SPEC, HS, em.rest_region(frame), frame,
                                  boost_variant=em.LITERAL, relative=True)
    assert abs(rep.slope) < 0.5
    assert min(lv["max_residual"] for lv in rep.levels) > 1e-2


def test_residual_region_guards():
    with pytest.raises(em.RegionError):
        em.kg_residual(SPEC, 0.1, [[0, 0, 0.1, 1.0]])
    with pytest.raises(em.RegionError):
        em.kg_residual(SPEC, 0.1, [[0, 0, 1.0, 0.05]])


def test_report_json():
    rep = em.residual_convergence(SPEC, HS, em.rest_region())
    data = json.loads(rep.to_json())
    assert [lv["h"] for lv in data["levels"]] == HS


# -- grids and export -----------------------------------------------------------------------------

def test_parse_grid_order():
    g = em.parse_grid("x=0:1:2,z=5,t=-1:1:3")
    assert g.shape == (6, 4)
    np.testing.assert_array_equal(g[:3, 3], [-1, 0, 1])
    np.testing.assert_array_equal(g[:, 2], 5)


@pytest.mark.parametrize("bad", ["w=1", "x=1:2", "x="])
def test_parse_grid_rejects(bad):
    with pytest.raises(ValueError):
        em.parse_grid(bad)


def test_profile_export(tmp_path):
    prof = em.sample_profile(SPEC, em.parse_grid("z=0:1:3,t=1"))
    prof.write_csv(tmp_path / "p.csv")
    prof.write_sidecar(tmp_path / "p.json")
    lines = (tmp_path / "p.csv").read_text().splitlines()
    assert lines[0] == "x,y,z,t,comp,Re,Im" and len(lines) == 1 + 3 * 4
    assert json.loads((tmp_path / "p.json").read_text())["provenance"] == "closed-form"


def test_mode_sum_profile_tracks_closed_form():
    grid = em.parse_grid("x=0,y=0,z=1:3:3,t=1")
    ms = em.mode_sum_profile(SPEC, grid).values[:, 0]
    cf = em.closed_form_profile(SPEC, grid)[:, 0]
    scale = np.abs(cf).max()
    assert np.abs(ms - cf).max() < 2e-2 * scale
