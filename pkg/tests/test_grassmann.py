from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fermion_emergence import grassmann as gr
from fermion_emergence.grassmann import GrassmannElement as E, bar, eta

coeffs = st.complex_numbers(min_magnitude=0, max_magnitude=3, allow_nan=False, allow_infinity=False)


def elements(n):
    return st.dictionaries(st.integers(0, (1 << (2 * n)) - 1), coeffs, max_size=6).map(
        lambda d: E(n, d))


def matrices(n):
    return st.lists(st.floats(-2, 2), min_size=2 * n * n, max_size=2 * n * n).map(
        lambda xs: (np.array(xs[: n * n]) + 1j * np.array(xs[n * n:])).reshape(n, n))


# -- hand-worked values -------------------------------------------------------------

def test_generators_anticommute_and_square_to_zero():
    a, b = E.generator(1, bar(0)), E.generator(1, eta(0))
    assert (a * b + b * a).is_zero()
    assert (a * a).is_zero() and (b * b).is_zero()


def test_monomial_coefficient_reads_written_order():
    x = E.monomial(1, [eta(0), bar(0)], 2.0)
    assert x.coefficient([eta(0), bar(0)]) == 2.0
    assert x.coefficient([bar(0), eta(0)]) == -2.0


def test_exp_of_single_bilinear_truncates():
    c = 1.5 - 0.5j
    x = gr.grassmann_exp(gr.bilinear(1, [[c]]))
    assert x.scalar_part == 1
    assert x.coefficient([bar(0), eta(0)]) == c
    assert len(x.terms) == 2


def test_exp_two_modes_quadratic_term():
    # exp(a eb0 e0 + b eb1 e1) = 1 + a eb0 e0 + b eb1 e1 + ab eb0 e0 eb1 e1
    x = gr.grassmann_exp(gr.bilinear(2, np.diag([2.0, 3.0])))
    assert x.coefficient([bar(0), eta(0), bar(1), eta(1)]) == pytest.approx(6.0)


def test_berezin_gaussian_sign():
    c = 2.0 + 1.0j
    val = gr.berezin_integrate(gr.grassmann_exp(gr.bilinear(1, [[c]])), [bar(0), eta(0)])
    assert val.scalar_part == -c


def test_berezin_of_single_generator():
    assert gr.berezin_integrate(E.generator(1, eta(0)), [eta(0)]).scalar_part == 1
    assert gr.berezin_integrate(E.scalar(1), [eta(0)]).is_zero()


def test_repeated_integration_variable_rejected():
    with pytest.raises(gr.GrassmannError):
        gr.berezin_integrate(E.scalar(1), [eta(0), eta(0)])


def test_left_and_right_derivatives():
    x = E.monomial(1, [bar(0), eta(0)])
    assert gr.derivative(x, eta(0), "left").coefficient([bar(0)]) == -1
    assert gr.derivative(x, eta(0), "right").coefficient([bar(0)]) == 1
    assert gr.derivative(x, bar(0)).coefficient([eta(0)]) == 1


def test_measure_sign_values():
    assert [gr.measure_sign(k) for k in range(1, 6)] == [1, -1, -1, 1, 1]


def test_dump_format():
    assert gr.gaussian(np.array([[-1.0]])).dump().splitlines()[-1].startswith("eb0 e0 -> ")


# -- Gaussian dual and norm -----------------------------------------------------------

@pytest.mark.parametrize("omega", [np.array([[-1.0]]), np.array([[0.5 + 0.5j]]),
                                   -np.eye(2), np.array([[1.0, 2.0], [0.0, -1.0]])])
def test_gaussian_dual_closed_form(omega):
    d = gr.gaussian_dual(omega)
    assert d.prefactor == pytest.approx(d.brute_prefactor, abs=1e-12)
    np.testing.assert_allclose(d.exponent, np.linalg.inv(omega.conj().T), atol=1e-12)
    np.testing.assert_allclose(d.brute_exponent, d.exponent, atol=1e-12)


def test_gaussian_dual_singular_rejected():
    with pytest.raises(gr.GrassmannError):
        gr.gaussian_dual(np.zeros((2, 2)))


def test_norm_single_mode():
    # det(1 + |w|^2)
    assert gr.state_norm(np.array([[2.0]])) == pytest.approx(5.0)
    assert gr.state_norm(-np.eye(3)) == pytest.approx(8.0)


@given(st.integers(1, 3).flatmap(matrices))
def test_norm_matches_berezin_integration(omega):
    f = gr.state_norm_formula(omega)
    b = gr.state_norm_brute(omega)
    assert abs(b - f) <= 1e-10 * max(1.0, f)


# -- algebraic properties -------------------------------------------------------------

@given(elements(2), elements(2), elements(2))
def test_associativity(a, b, c):
    assert ((a * b) * c).allclose(a * (b * c), 1e-9)


@given(elements(2), elements(2), elements(2))
def test_distributivity(a, b, c):
    assert (a * (b + c)).allclose(a * b + a * c, 1e-9)


@given(st.integers(1, 3).flatmap(matrices))
def test_exp_inverse(m):
    n = m.shape[0]
    a = gr.bilinear(n, m)
    assert (gr.grassmann_exp(a) * gr.grassmann_exp(-a)).allclose(E.scalar(n), 1e-9)


@given(elements(2), st.sampled_from([bar(0), bar(1), eta(0), eta(1)]))
def test_derivative_anticommutator(x, g):
    gx = E.generator(2, g)
    out = gr.derivative(gx * x, g) + gx * gr.derivative(x, g)
    assert out.allclose(x, 1e-12)


@given(elements(2), st.sampled_from([bar(0), eta(0), bar(1), eta(1)]))
def test_integration_is_derivative(x, g):
    assert gr.same_terms(gr.berezin_integrate(x, [g]), gr.derivative(x, g))


@given(elements(1), elements(1))
def test_even_elements_commute(a, b):
    a = E(1, {m: c for m, c in a.terms.items() if bin(m).count("1") % 2 == 0})
    assert (a * b).allclose(b * a, 1e-9)
