from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fermion_emergence import spinors as sp

momenta = st.lists(st.floats(-5, 5), min_size=3, max_size=3).map(np.array)
masses = st.floats(0, 3)
speeds = st.floats(-0.95, 0.95)


def test_clifford_relations():
    assert np.array_equal(sp.BETA @ sp.BETA, sp.I4)
    for i in range(3):
        assert np.array_equal(sp.ALPHA[i] @ sp.BETA + sp.BETA @ sp.ALPHA[i], np.zeros((4, 4)))
        for j in range(3):
            ac = sp.ALPHA[i] @ sp.ALPHA[j] + sp.ALPHA[j] @ sp.ALPHA[i]
            assert np.array_equal(ac, 2 * (i == j) * sp.I4)


def test_gamma_matrices_metric():
    g = (sp.GAMMA0,) + sp.GAMMA
    eta = np.diag([1, -1, -1, -1])
    for a in range(4):
        for b in range(4):
            np.testing.assert_allclose(g[a] @ g[b] + g[b] @ g[a], 2 * eta[a, b] * sp.I4)


def test_hamiltonian_at_rest_is_beta_m():
    np.testing.assert_array_equal(sp.hamiltonian_k([0, 0, 0], 2.0), 2.0 * sp.BETA)


def test_negative_mass_rejected():
    with pytest.raises(ValueError):
        sp.hamiltonian_k([0, 0, 1], -1.0)


@given(momenta, masses)
def test_square_and_spectrum(k, m):
    assert sp.square_check(k, m)
    w = sp.energy(k, m)
    np.testing.assert_allclose(np.linalg.eigvalsh(sp.hamiltonian_k(k, m)), [-w, -w, w, w],
                               atol=1e-10 * max(1, w))


@given(momenta, st.floats(0.1, 3))
def test_projectors(k, m):
    pp, pm = sp.energy_projectors(k, m)
    np.testing.assert_allclose(pp + pm, sp.I4, atol=1e-12)
    np.testing.assert_allclose(pp @ pp, pp, atol=1e-12)
    np.testing.assert_allclose(pp @ pm, 0, atol=1e-12)
    assert np.trace(pp).real == pytest.approx(2.0)


@given(momenta, st.floats(0.1, 3), st.sampled_from([sp.ENERGY, sp.PAPER]))
def test_covariance_is_involution(k, m, conv):
    om = sp.covariance_k(k, m, conv)
    np.testing.assert_allclose(om @ om, sp.I4, atol=1e-12)
    np.testing.assert_allclose(om, om.conj().T, atol=1e-12)


def test_energy_convention_is_minus_h_over_e():
    k, m = np.array([0.3, 0.4, 1.2]), 0.7
    np.testing.assert_allclose(sp.covariance_k(k, m), -sp.hamiltonian_k(k, m) / sp.energy(k, m))
    np.testing.assert_allclose(sp.covariance_k(k, m, sp.PAPER), -sp.covariance_k(k, m))


def test_degenerate_spectrum():
    with pytest.raises(sp.DegenerateSpectrum):
        sp.energy_projectors([0, 0, 0], 0.0)


def test_boost_column_v06():
    col = sp.boost_spinor(sp.rest_spinor(1), sp.BoostParams(0.6))
    np.testing.assert_allclose(col, [math.sqrt(1.125), 0, math.sqrt(1.125) / 3, 0], atol=1e-12)


@given(speeds, st.floats(0.1, 3))
def test_boosted_spinor_is_positive_energy_eigenvector(v, m):
    b = sp.BoostParams(v)
    E, p = sp.boosted_momentum(b, m)
    for a in (1, 2):
        u = sp.boost_spinor(sp.rest_spinor(a), b, m)
        np.testing.assert_allclose(sp.hamiltonian_k([0, 0, p], m) @ u, E * u, atol=1e-9 * E)


@given(speeds, speeds)
def test_boost_composition(v1, v2):
    b1, b2 = sp.BoostParams(v1), sp.BoostParams(v2)
    composed = sp.BoostParams((v1 + v2) / (1 + v1 * v2))
    np.testing.assert_allclose(sp.boost_matrix(b1) @ sp.boost_matrix(b2), sp.boost_matrix(composed),
                               atol=1e-9)


@given(speeds)
def test_boost_preserves_dirac_bilinear(v):
    S = sp.boost_matrix(sp.BoostParams(v))
    np.testing.assert_allclose(S.conj().T @ sp.BETA @ S, sp.BETA, atol=1e-9)


def test_zero_boost_is_identity():
    np.testing.assert_array_equal(sp.boost_matrix(sp.BoostParams(0.0)), sp.I4)


@pytest.mark.parametrize("v", [1.0, -1.0, 1.5])
def test_superluminal_boost_rejected(v):
    with pytest.raises(ValueError):
        sp.BoostParams(v)


def test_boost_needs_mass():
    with pytest.raises(ValueError):
        sp.boost_spinor(sp.rest_spinor(1), sp.BoostParams(0.5), 0.0)


def test_format_matrix_rows():
    assert len(sp.format_matrix(sp.BETA).splitlines()) == 4
