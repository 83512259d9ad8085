import math
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad
from scipy.special import eval_legendre

from cryo_transport.errors import DomainError, OrderExceeded
from cryo_transport.series import RationalPolynomial
from cryo_transport.spectral import (EXACT_ORDER_CAP, J_coefficient, J_from_Q,
                                     eigenvalue_numeric, eigenvalue_polynomial,
                                     eigenvalue_table, eigenvalue_upper_bound, legendre_Q,
                                     legendre_Q_table, quadratic_approx, series_I,
                                     spectral_gap, spherical_u, spherical_u_polynomials,
                                     trace_partial_sum, trace_partial_sums)

FIRST_FOUR = {
    1: [0, F(1, 2), F(-1, 8)],
    2: [0, F(1, 2), F(-5, 8), F(1, 6)],
    3: [0, F(1, 2), F(-11, 8), F(25, 24), F(-15, 64)],
    4: [0, F(1, 2), F(-19, 8), F(27, 8), F(-119, 64), F(7, 20)],
}


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_first_four_polynomials(n):
    assert eigenvalue_polynomial(n) == RationalPolynomial(FIRST_FOUR[n])


@pytest.mark.parametrize("n", [1, 5, 17, 40])
def test_degree_is_n_plus_one(n):
    assert eigenvalue_polynomial(n).degree == n + 1


def quadrature_eigenvalue(n, h):
    # lambda_n(h) = 1/2 int_0^a phi_n(theta) sin(theta) d theta with phi_n = u_n / u_n(0)
    a = math.acos(1.0 - h)
    f = lambda th: spherical_u(n, th) / (-n * (n + 1)) * math.sin(th)
    return 0.5 * quad(f, 0.0, a, epsabs=1e-14, epsrel=1e-13, limit=200)[0]


@pytest.mark.parametrize("n", [1, 2, 3, 5, 8])
@pytest.mark.parametrize("h", [0.1, 0.7, 1.5, 2.0])
def test_eigenvalue_matches_cap_quadrature(n, h):
    assert eigenvalue_numeric(n, h) == pytest.approx(quadrature_eigenvalue(n, h), abs=1e-12)


def test_numeric_matches_exact_up_to_cap():
    h = np.linspace(0, 2, 41)
    table = eigenvalue_table(EXACT_ORDER_CAP, h)
    for n in range(1, EXACT_ORDER_CAP + 1):
        p = eigenvalue_polynomial(n)
        exact = np.array([p(F(x)) for x in h], dtype=float)
        np.testing.assert_allclose(table[n - 1], exact, atol=1e-13, err_msg=f"n={n}")


def test_known_values():
    assert eigenvalue_numeric(1, 0.3) == pytest.approx(0.13875, abs=1e-15)
    assert eigenvalue_numeric(2, 0.3) == pytest.approx(0.09825, abs=1e-15)
    assert eigenvalue_numeric(1, 0.35) == pytest.approx(0.159688, abs=1e-6)


@given(st.integers(1, 30), st.floats(0, 2))
def test_eigenvalues_obey_trace_bound(n, h):
    assert abs(eigenvalue_numeric(n, h)) <= eigenvalue_upper_bound(n, h) + 1e-14


def test_order_cap():
    with pytest.raises(OrderExceeded):
        eigenvalue_polynomial(EXACT_ORDER_CAP + 1)
    assert eigenvalue_polynomial(70, max_order=80).degree == 71


@pytest.mark.parametrize("h", [-0.1, 2.1, float("nan")])
def test_numeric_domain(h):
    with pytest.raises(DomainError):
        eigenvalue_numeric(1, h)


def test_series_I_low_orders():
    s = series_I(3)
    # I_1 = -2 lambda_1
    assert s[1] == eigenvalue_polynomial(1) * -2


@pytest.mark.parametrize("n", [1, 2, 7, 30])
def test_quadratic_approx_matches_taylor(n):
    p = eigenvalue_polynomial(n)
    h = 1e-3
    assert abs(float(p(F(h))) - quadratic_approx(n, h)) < 10 * abs(float(p.coefficient(3))) * h ** 3 + 1e-15


def test_spectral_gap():
    h = np.linspace(0, 0.5, 11)
    for x in h:
        assert spectral_gap(x) == pytest.approx(eigenvalue_numeric(1, x) - eigenvalue_numeric(2, x),
                                                abs=1e-15)
    with pytest.raises(DomainError):
        spectral_gap(0.6)


def test_trace_partial_sums_monotone_bounded():
    s = trace_partial_sums(0.5, 2000)
    assert np.all(np.diff(s) >= 0)
    assert s[-1] < 0.25
    # relative deficit decays like 1/n_max
    assert (0.25 - trace_partial_sum(0.5, 100)) / 0.25 == pytest.approx(5.5e-3, rel=0.05)


def test_trace_full_cap():
    assert eigenvalue_numeric(1, 2.0) == pytest.approx(0.5, abs=1e-15)
    assert trace_partial_sum(2.0, 5000) == pytest.approx(1.0, abs=1e-3)


def test_upper_bound():
    assert eigenvalue_upper_bound(1, 0.5) == pytest.approx(math.sqrt(0.5 / 6))
    with pytest.raises(DomainError):
        eigenvalue_upper_bound(1, 3.0)


@given(st.integers(0, 40), st.floats(-1, 1))
def test_legendre_Q_float(n, z):
    assert legendre_Q(n, z) == pytest.approx((-1) ** n * eval_legendre(n, z), abs=1e-12)


def test_legendre_Q_exact():
    assert legendre_Q(2, F(1, 2)) == F(-1, 8)
    assert legendre_Q(3, 1) == -1
    np.testing.assert_allclose(legendre_Q_table(5, 0.3),
                               [legendre_Q(k, 0.3) for k in range(6)], atol=1e-15)


def test_J_closed_forms():
    z = 0.2
    assert J_coefficient(2, z) == pytest.approx((1 - z) / 4, abs=1e-15)
    assert J_coefficient(3, z) == pytest.approx(J_from_Q(3, z), abs=1e-15)
    assert J_coefficient(3, z) == pytest.approx(-0.28, abs=1e-15)


@given(st.integers(2, 60), st.floats(-1, 0.95))
def test_J_is_derivative_of_eigenvalue(n, z):
    d = eigenvalue_polynomial(n - 1).derivative().evaluate_exact(F(z) + 1)
    assert J_coefficient(n, z) == pytest.approx(float(d), abs=1e-10)


def test_J_domain():
    with pytest.raises(DomainError):
        J_coefficient(3, 1.0)
    with pytest.raises(DomainError):
        J_coefficient(3, -1.5)


def test_spherical_u():
    for n in range(1, 12):
        assert spherical_u(n, 0.0) == pytest.approx(-n * (n + 1), abs=1e-12)
    assert spherical_u(1, 0.4) == pytest.approx(-(1 + math.cos(0.4)), abs=1e-15)
    assert spherical_u(5, 0.0) == pytest.approx(-30.0)
    p, q = spherical_u_polynomials(1)
    assert p.is_zero()
