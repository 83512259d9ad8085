"""Closed-form spectrum of the localized parallel transport operator.

Two independent routes to the eigenvalues ``lambda_n(h)``:

* exact: expand the generating function ``I(h, t)`` as a truncated series in
  ``t`` with polynomial-in-``h`` coefficients, then
  ``lambda_n = -I_n / (n (n + 1))``;
* numeric: write the same coefficients through Legendre and Gegenbauer
  families evaluated at ``z = 1 - h`` by their three-term recurrences,
  which stays accurate for very large ``n``.

With ``A(t) = 1 - 2 t z + t**2`` the generating function is

    I(h, t) = 1/2 [h A^(-1/2) - t h (2 - h) A^(-3/2) - (A^(1/2) - (1 - t)) / t]

so that, for ``n >= 1``,

    I_n = 1/2 [h P_n(z) - h (2 - h) C^(3/2)_{n-1}(z) - (P_{n-1}(z) - P_{n+1}(z)) / (2n + 1)].
"""

from __future__ import annotations

import math
import threading
from fractions import Fraction

import numpy as np

from .errors import DomainError, OrderExceeded
from .series import RationalPolynomial, TruncatedSeries

EXACT_ORDER_CAP = 64
NUMERIC_N_MAX = 10**6

_H = RationalPolynomial.variable()
_ONE = RationalPolynomial.constant(1)
_ZERO = RationalPolynomial()


class _GrowingCache:
    """Holds the highest-order series built so far; lower orders are truncations.

    Population happens under a lock so concurrent callers never see a
    half-built entry.
    """

    def __init__(self, build):
        self._build = build
        self._series = None
        self._lock = threading.Lock()

    def get(self, order: int) -> TruncatedSeries:
        s = self._series
        if s is not None and s.order >= order:
            return s.truncate(order)
        with self._lock:
            s = self._series
            if s is None or s.order < order:
                s = self._build(order)
                self._series = s
        return s.truncate(order)


def _unit_quadratic(order: int, z: RationalPolynomial, sign: int = -1) -> TruncatedSeries:
    """``1 + sign*2 z t + t**2`` as a series with polynomial coefficients."""
    return TruncatedSeries([_ONE, z * (2 * sign), _ONE], order, _ZERO)


def _build_I(order: int) -> TruncatedSeries:
    inner = order + 1
    z = _ONE - _H
    A = _unit_quadratic(inner, z)
    a_m12 = A.binomial_power(Fraction(-1, 2))
    a_m32 = A.binomial_power(Fraction(-3, 2))
    a_p12 = A.binomial_power(Fraction(1, 2))
    one_minus_t = TruncatedSeries([_ONE, -_ONE], inner, _ZERO)
    tail = (a_p12 - one_minus_t).shift(-1)        # order: inner - 1 == order
    head = a_m12.truncate(order) * _H
    mid = a_m32.shift(1).truncate(order) * (_H * (2 - _H))
    return (head - mid - tail) * Fraction(1, 2)


_I_CACHE = _GrowingCache(_build_I)


def series_I(order: int) -> TruncatedSeries:
    """Exact expansion of ``I(h, t)`` to ``t**order``; coefficients are polynomials in ``h``."""
    if order < 1:
        raise ValueError("order must be >= 1")
    return _I_CACHE.get(order)


def eigenvalue_polynomial(n: int, max_order: int = EXACT_ORDER_CAP) -> RationalPolynomial:
    """``lambda_n(h)`` as an exact polynomial of degree ``n + 1``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if n > max_order:
        raise OrderExceeded(f"n={n} exceeds the exact-order cap {max_order}; "
                            "use eigenvalue_numeric")
    return series_I(n)[n] * Fraction(-1, n * (n + 1))


# numeric route -------------------------------------------------------------

def _check_h(h):
    h_arr = np.asarray(h, dtype=float)
    if np.any(h_arr < 0.0) or np.any(h_arr > 2.0) or np.any(~np.isfinite(h_arr)):
        raise DomainError(f"h must lie in [0, 2], got {h!r}")
    return h_arr


def eigenvalue_table(n_max: int, h) -> np.ndarray:
    """``lambda_n(h)`` for ``n = 1..n_max``; shape ``(n_max,) + shape(h)``.

    One forward pass of the Legendre recurrence ``P_k`` and the Gegenbauer
    recurrence ``C^(3/2)_k`` at ``z = 1 - h``.
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    if n_max > NUMERIC_N_MAX:
        raise DomainError(f"n_max={n_max} exceeds {NUMERIC_N_MAX}")
    h = _check_h(h)
    z = 1.0 - h
    out = np.empty((n_max,) + h.shape)
    # Legendre P_{k-1}, P_k, P_{k+1} and Gegenbauer C_{k-1}, C_{k-2}
    p_prev = np.ones_like(z)          # P_0
    p_cur = z.copy()                  # P_1
    c_prev2 = np.zeros_like(z)        # C_{-1}
    c_prev = np.ones_like(z)          # C_0
    hh = h * (2.0 - h)
    for n in range(1, n_max + 1):
        p_next = ((2 * n + 1) * z * p_cur - n * p_prev) / (n + 1)
        I_n = 0.5 * (h * p_cur - hh * c_prev - (p_prev - p_next) / (2 * n + 1))
        out[n - 1] = -I_n / (n * (n + 1))
        # advance: C_n from k*C_k = 2z(k+1/2) C_{k-1} - (k+1) C_{k-2}
        c_next = (2.0 * z * (n + 0.5) * c_prev - (n + 1) * c_prev2) / n
        c_prev2, c_prev = c_prev, c_next
        p_prev, p_cur = p_cur, p_next
    return out


def eigenvalue_numeric(n: int, h: float) -> float:
    """Floating value of ``lambda_n(h)`` through the recurrences (no polynomial expansion)."""
    if n < 1 or n > NUMERIC_N_MAX:
        raise DomainError(f"n must lie in [1, {NUMERIC_N_MAX}], got {n}")
    return float(eigenvalue_table(n, float(h))[n - 1])


def quadratic_approx(n: int, h: float) -> float:
    """Second-order small-``h`` expansion of ``lambda_n``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return 0.5 * h - (1 + (n + 2) * (n - 1)) * h * h / 8.0


def spectral_gap(h: float) -> float:
    """``lambda_1 - lambda_2 = h^2/2 - h^3/6``, valid on ``[0, 1/2]``."""
    if not 0.0 <= h <= 0.5:
        raise DomainError(f"spectral gap formula holds for h in [0, 1/2], got {h!r}")
    return 0.5 * h * h - h ** 3 / 6.0


def trace_partial_sums(h: float, n_max: int) -> np.ndarray:
    """Cumulative ``sum_{n<=m} (2n+1) lambda_n(h)^2`` for ``m = 1..n_max``."""
    lam = eigenvalue_table(n_max, float(h))
    n = np.arange(1, n_max + 1)
    return np.cumsum((2 * n + 1) * lam * lam)


def trace_partial_sum(h: float, n_max: int) -> float:
    """Partial sum of ``tr(T_h^2) = sum (2n+1) lambda_n^2``; the full sum is ``h/2``."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    return float(trace_partial_sums(h, n_max)[-1])


def eigenvalue_upper_bound(n: int, h: float) -> float:
    """Bound ``sqrt(h) / sqrt(4n + 2)`` implied by the trace identity."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0.0 <= h <= 2.0:
        raise DomainError(f"h must lie in [0, 2], got {h!r}")
    return math.sqrt(h) / math.sqrt(4 * n + 2)


# Legendre apparatus ----------------------------------------------------------

def legendre_Q(n: int, z):
    """``Q_n(z) = (-1)^n P_n(z)``.

    Rational ``z`` (``int`` or ``Fraction``) runs the recurrence exactly and
    returns a ``Fraction``; anything else is evaluated in floating point.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    exact = isinstance(z, (int, Fraction))
    if exact:
        z = Fraction(z)
        p_prev, p_cur = Fraction(1), z
    else:
        z = float(z)
        p_prev, p_cur = 1.0, z
    if n == 0:
        return p_prev
    for k in range(1, n):
        p_prev, p_cur = p_cur, ((2 * k + 1) * z * p_cur - k * p_prev) / (k + 1)
    return -p_cur if n % 2 else p_cur


def legendre_Q_table(n_max: int, z) -> np.ndarray:
    """``Q_0..Q_{n_max}`` at float ``z`` (array-valued ``z`` allowed)."""
    z = np.asarray(z, dtype=float)
    out = np.empty((n_max + 1,) + z.shape)
    out[0] = 1.0
    if n_max >= 1:
        out[1] = z
    for k in range(1, n_max):
        out[k + 1] = ((2 * k + 1) * z * out[k] - k * out[k - 1]) / (k + 1)
    out[1::2] *= -1.0
    return out


def J_series(order: int, z: float) -> TruncatedSeries:
    """Float expansion of ``(t + t z + t^2 + 1) / (2 (1 - z)) * (t^2 + 2 t z + 1)^(-1/2)``."""
    z = float(z)
    if z >= 1.0:
        raise DomainError("J(z, t) has a pole at z = 1")
    root = TruncatedSeries([1.0, 2.0 * z, 1.0], order, 0.0).binomial_power(-0.5)
    numer = TruncatedSeries([1.0, 1.0 + z, 1.0], order, 0.0)
    return (numer * root) * (1.0 / (2.0 * (1.0 - z)))


def J_coefficient(n: int, z: float) -> float:
    """Coefficient of ``t^n`` in the closed-form generating function ``J(z, t)``."""
    if n < 0:
        raise ValueError("n must be >= 0")
    if not -1.0 <= z < 1.0:
        raise DomainError(f"z must lie in [-1, 1), got {z!r}")
    return float(J_series(max(n, 2), z)[n])


def J_from_Q(n: int, z: float) -> float:
    """``[Q_n + (1+z) Q_{n-1} + Q_{n-2}] / (2 (1 - z))`` for ``n >= 2``."""
    if n < 2:
        raise ValueError("the Q-combination holds for n >= 2")
    q = legendre_Q_table(n, z)
    return float((q[n] + (1.0 + z) * q[n - 1] + q[n - 2]) / (2.0 * (1.0 - z)))


# spherical function u_n along the geodesic ------------------------------------

_C = RationalPolynomial.variable()


def _build_G(order: int):
    A = _unit_quadratic(order, _C)
    return A.binomial_power(Fraction(-5, 2)), A.binomial_power(Fraction(-3, 2))


class _GCache:
    def __init__(self):
        self._pair = None
        self._lock = threading.Lock()

    def get(self, order):
        pair = self._pair
        if pair is None or pair[0].order < order:
            with self._lock:
                pair = self._pair
                if pair is None or pair[0].order < order:
                    pair = _build_G(order)
                    self._pair = pair
        return pair


_G_CACHE = _GCache()


def spherical_u_polynomials(n: int):
    """``(p, q)`` with ``u_n(theta) = 3 sin(theta)^2 p(cos theta) - q(cos theta)``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    a_m52, a_m32 = _G_CACHE.get(n)
    p = a_m52[n - 2] if n >= 2 else RationalPolynomial()
    q = a_m32[n - 1] * (_C + 1)
    return p, q


def spherical_u(n: int, theta: float) -> float:
    """``t^n`` coefficient of ``G_{1,-1}(theta, t)``; equals ``-n(n+1)`` at ``theta = 0``."""
    p, q = spherical_u_polynomials(n)
    c = math.cos(theta)
    s2 = math.sin(theta) ** 2
    cf = Fraction(c)
    return float(3 * Fraction(s2) * p.evaluate_exact(cf) - q.evaluate_exact(cf))
