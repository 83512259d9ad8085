"""Exact polynomials over Q and truncated power series.

``RationalPolynomial`` is a dense univariate polynomial with ``Fraction``
coefficients. ``TruncatedSeries`` is a power series in ``t`` known up to a
fixed order; its coefficients may live in any ring that supports ``+``, ``-``
and ``*`` with integers and fractions (``Fraction``, ``float`` or
``RationalPolynomial``).
"""

from __future__ import annotations

import math
from fractions import Fraction
from numbers import Rational
from typing import Callable, Iterable, Sequence


def _to_fraction(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, (int, Rational)):
        return Fraction(c)
    if isinstance(c, float):
        return Fraction(c)
    raise TypeError(f"cannot use {type(c).__name__} as an exact coefficient")


class RationalPolynomial:
    """Immutable polynomial ``sum_k coefficients[k] * x**k`` with exact coefficients."""

    __slots__ = ("_coeffs",)

    def __init__(self, coefficients: Iterable = ()):
        cs = [_to_fraction(c) for c in coefficients]
        while cs and cs[-1] == 0:
            cs.pop()
        self._coeffs = tuple(cs)

    @classmethod
    def constant(cls, c) -> "RationalPolynomial":
        return cls([c])

    @classmethod
    def variable(cls) -> "RationalPolynomial":
        return cls([0, 1])

    @property
    def coefficients(self) -> tuple:
        return self._coeffs

    @property
    def degree(self) -> int:
        """Degree; ``-1`` for the zero polynomial."""
        return len(self._coeffs) - 1

    def is_zero(self) -> bool:
        return not self._coeffs

    def coefficient(self, k: int) -> Fraction:
        return self._coeffs[k] if 0 <= k < len(self._coeffs) else Fraction(0)

    def __bool__(self):
        return bool(self._coeffs)

    def __eq__(self, other):
        if isinstance(other, RationalPolynomial):
            return self._coeffs == other._coeffs
        if isinstance(other, (int, Fraction)):
            return self == RationalPolynomial.constant(other)
        return NotImplemented

    def __hash__(self):
        return hash(self._coeffs)

    def __repr__(self):
        if not self._coeffs:
            return "RationalPolynomial(0)"
        terms = []
        for k, c in enumerate(self._coeffs):
            if c == 0:
                continue
            terms.append(f"{c}" if k == 0 else f"({c})*x^{k}")
        return "RationalPolynomial(" + " + ".join(terms) + ")"

    # arithmetic -----------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, RationalPolynomial):
            return other
        if isinstance(other, (int, Fraction)):
            return RationalPolynomial.constant(other)
        return None

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        a, b = self._coeffs, other._coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for k, c in enumerate(b):
            out[k] += c
        return RationalPolynomial(out)

    __radd__ = __add__

    def __neg__(self):
        return RationalPolynomial(-c for c in self._coeffs)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            if other == 0:
                return RationalPolynomial()
            return RationalPolynomial(c * other for c in self._coeffs)
        if not isinstance(other, RationalPolynomial):
            return NotImplemented
        a, b = self._coeffs, other._coeffs
        if not a or not b:
            return RationalPolynomial()
        out = [Fraction(0)] * (len(a) + len(b) - 1)
        for i, ai in enumerate(a):
            if ai == 0:
                continue
            for j, bj in enumerate(b):
                out[i + j] += ai * bj
        return RationalPolynomial(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self * (1 / Fraction(other))
        return NotImplemented

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative powers are not polynomials")
        result = RationalPolynomial.constant(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def derivative(self) -> "RationalPolynomial":
        return RationalPolynomial(k * c for k, c in enumerate(self._coeffs) if k)

    def compose(self, inner: "RationalPolynomial") -> "RationalPolynomial":
        """``self(inner(x))`` by Horner's rule."""
        result = RationalPolynomial()
        for c in reversed(self._coeffs):
            result = result * inner + c
        return result

    # evaluation ------------------------------------------------------------

    def evaluate_exact(self, x) -> Fraction:
        """Exact value at a rational point ``p/q``.

        Works on integers throughout: ``q**d * P(p/q) = sum_k a_k p**k q**(d-k)``.
        """
        x = _to_fraction(x)
        if not self._coeffs:
            return Fraction(0)
        p, q = x.numerator, x.denominator
        d = self.degree
        den = 1
        for c in self._coeffs:
            den = den * c.denominator // math.gcd(den, c.denominator)
        ints = [c.numerator * (den // c.denominator) for c in self._coeffs]
        acc = ints[d]
        qpow = 1
        for k in range(d - 1, -1, -1):
            qpow *= q
            acc = acc * p + ints[k] * qpow
        return Fraction(acc, den * q ** d)

    def __call__(self, x):
        """Evaluate. Rational input gives an exact ``Fraction``; float input is
        evaluated exactly at the float's binary value and rounded once."""
        if isinstance(x, (int, Fraction)):
            return self.evaluate_exact(x)
        return float(self.evaluate_exact(Fraction(float(x))))

    def evaluate_float(self, x: float) -> float:
        """Plain floating Horner (fast, subject to cancellation)."""
        acc = 0.0
        for c in reversed(self._coeffs):
            acc = acc * x + float(c)
        return acc


class TruncatedSeries:
    """Power series ``sum_{k<=order} c_k t^k`` with coefficients in a generic ring."""

    __slots__ = ("order", "coefficients", "_zero")

    def __init__(self, coefficients: Sequence, order: int | None = None, zero=None):
        cs = list(coefficients)
        if order is None:
            order = len(cs) - 1
        if order < 0:
            raise ValueError("order must be non-negative")
        if zero is None:
            if not cs:
                raise ValueError("need a zero element for an empty series")
            zero = cs[0] * 0
        cs = cs[: order + 1] + [zero] * (order + 1 - len(cs))
        self.order = order
        self.coefficients = cs
        self._zero = zero

    @classmethod
    def from_terms(cls, terms: dict, order: int, zero) -> "TruncatedSeries":
        cs = [zero] * (order + 1)
        for k, c in terms.items():
            if k <= order:
                cs[k] = c
        return cls(cs, order, zero)

    @property
    def zero(self):
        return self._zero

    def __getitem__(self, k: int):
        return self.coefficients[k]

    def __len__(self):
        return self.order + 1

    def __repr__(self):
        return f"TruncatedSeries(order={self.order}, coefficients={self.coefficients!r})"

    def __eq__(self, other):
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        return self.order == other.order and all(
            a == b for a, b in zip(self.coefficients, other.coefficients))

    def _is_zero(self, c) -> bool:
        if isinstance(c, RationalPolynomial):
            return c.is_zero()
        return c == 0

    def truncate(self, order: int) -> "TruncatedSeries":
        if order > self.order:
            raise ValueError("cannot extend a truncated series")
        return TruncatedSeries(self.coefficients[: order + 1], order, self._zero)

    def map(self, fn: Callable, zero=None) -> "TruncatedSeries":
        cs = [fn(c) for c in self.coefficients]
        return TruncatedSeries(cs, self.order, zero if zero is not None else fn(self._zero))

    def _binary_order(self, other: "TruncatedSeries") -> int:
        return min(self.order, other.order)

    def __add__(self, other):
        if isinstance(other, TruncatedSeries):
            n = self._binary_order(other)
            return TruncatedSeries([a + b for a, b in zip(self.coefficients[: n + 1],
                                                          other.coefficients[: n + 1])],
                                   n, self._zero)
        cs = list(self.coefficients)
        cs[0] = cs[0] + other
        return TruncatedSeries(cs, self.order, self._zero)

    __radd__ = __add__

    def __neg__(self):
        return TruncatedSeries([-c for c in self.coefficients], self.order, self._zero)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, TruncatedSeries):
            return TruncatedSeries([c * other for c in self.coefficients], self.order,
                                   self._zero)
        n = self._binary_order(other)
        a = self.coefficients
        b = other.coefficients
        nz_b = [(j, bj) for j, bj in enumerate(b[: n + 1]) if not self._is_zero(bj)]
        out = [self._zero] * (n + 1)
        for i in range(n + 1):
            ai = a[i]
            if self._is_zero(ai):
                continue
            for j, bj in nz_b:
                if i + j > n:
                    break
                out[i + j] = out[i + j] + ai * bj
        return TruncatedSeries(out, n, self._zero)

    def __rmul__(self, other):
        return TruncatedSeries([other * c for c in self.coefficients], self.order, self._zero)

    def shift(self, k: int) -> "TruncatedSeries":
        """Multiply by ``t**k``. Negative ``k`` divides and lowers the known order;
        the dropped low coefficients must be zero."""
        if k >= 0:
            cs = [self._zero] * k + self.coefficients
            return TruncatedSeries(cs[: self.order + 1], self.order, self._zero)
        m = -k
        for c in self.coefficients[:m]:
            if not self._is_zero(c):
                raise ValueError("series is not divisible by t^%d" % m)
        if self.order - m < 0:
            raise ValueError("dividing would leave no known coefficients")
        return TruncatedSeries(self.coefficients[m:], self.order - m, self._zero)

    def binomial_power(self, alpha) -> "TruncatedSeries":
        """``self ** alpha`` for a series with constant term 1.

        Uses the recurrence from ``a f' = alpha a' f``:
        ``f_n = (1/n) sum_{k=1..n} ((alpha+1) k - n) a_k f_{n-k}``.
        """
        a = self.coefficients
        if not (a[0] == 1 or a[0] == 1.0 or
                (isinstance(a[0], RationalPolynomial) and a[0] == RationalPolynomial.constant(1))):
            raise ValueError("binomial_power needs a unit constant term")
        alpha = Fraction(alpha) if not isinstance(alpha, float) else alpha
        one = a[0]
        nz = [(k, a[k]) for k in range(1, self.order + 1) if not self._is_zero(a[k])]
        f = [one]
        for n in range(1, self.order + 1):
            acc = self._zero
            for k, ak in nz:
                if k > n:
                    break
                w = ((alpha + 1) * k - n) / n
                if w == 0:
                    continue
                acc = acc + ak * f[n - k] * w
            f.append(acc)
        return TruncatedSeries(f, self.order, self._zero)

    def compose(self, inner: "TruncatedSeries") -> "TruncatedSeries":
        """``self(inner(t))`` for ``inner`` with zero constant term (Horner)."""
        if not self._is_zero(inner.coefficients[0]):
            raise ValueError("inner series must have zero constant term")
        n = self._binary_order(inner)
        result = TruncatedSeries([self._zero], n, self._zero)
        for c in reversed(self.coefficients[: n + 1]):
            result = result * inner + c
        return result
