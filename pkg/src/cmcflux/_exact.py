"""Exact Gaussian-rational arithmetic for residues of rational functions.

Every float is a dyadic rational, so converting inputs with ``Fraction`` keeps
the computation exact relative to the data actually supplied.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb


@dataclass(frozen=True)
class GQ:
    re: Fraction
    im: Fraction = Fraction(0)

    @classmethod
    def of(cls, c) -> "GQ":
        if isinstance(c, GQ):
            return c
        c = complex(c)
        return cls(Fraction(c.real), Fraction(c.imag))

    def __add__(self, o):
        o = GQ.of(o)
        return GQ(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self):
        return GQ(-self.re, -self.im)

    def __sub__(self, o):
        return self + (-GQ.of(o))

    def __rsub__(self, o):
        return GQ.of(o) - self

    def __mul__(self, o):
        o = GQ.of(o)
        return GQ(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def inverse(self) -> "GQ":
        d = self.re * self.re + self.im * self.im
        if d == 0:
            raise ZeroDivisionError("GQ division by zero")
        return GQ(self.re / d, -self.im / d)

    def __truediv__(self, o):
        return self * GQ.of(o).inverse()

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        out, base = GQ(Fraction(1)), self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __bool__(self):
        return self.re != 0 or self.im != 0

    def __complex__(self):
        return complex(float(self.re), float(self.im))


ZERO = GQ(Fraction(0))
ONE = GQ(Fraction(1))
I = GQ(Fraction(0), Fraction(1))


def poly(coeffs) -> list[GQ]:
    return [GQ.of(c) for c in coeffs]


def padd(a, b):
    n = max(len(a), len(b))
    return [(a[i] if i < len(a) else ZERO) + (b[i] if i < len(b) else ZERO) for i in range(n)]


def pscale(a, c):
    c = GQ.of(c)
    return [c * x for x in a]


def pmul(a, b):
    out = [ZERO] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if not x:
            continue
        for j, y in enumerate(b):
            out[i + j] = out[i + j] + x * y
    return out


def from_roots(roots, scale=ONE):
    """``scale * prod (z - r)^m`` for (r, m) pairs with m >= 0."""
    out = [GQ.of(scale)]
    for r, m in roots:
        for _ in range(m):
            out = pmul(out, [-GQ.of(r), ONE])
    return out


def shift(a, b):
    """Coefficients of ``a(b + s)`` in powers of s."""
    b = GQ.of(b)
    n = len(a)
    out = []
    for k in range(n):
        acc = ZERO
        for j in range(k, n):
            if a[j]:
                acc = acc + a[j] * (b ** (j - k)) * comb(j, k)
        out.append(acc)
    return out


def _series_mul(a, b, order):
    out = [ZERO] * order
    for i in range(min(order, len(a))):
        if not a[i]:
            continue
        for j in range(min(order - i, len(b))):
            out[i + j] = out[i + j] + a[i] * b[j]
    return out


def residue(num, den_factors, pole) -> GQ:
    """Residue of ``num / prod (z - r)^m`` at ``pole`` by Laurent expansion.

    ``den_factors`` is a list of (root, multiplicity) with exact roots; ``pole``
    must be one of them.
    """
    pole = GQ.of(pole)
    m = sum(k for r, k in den_factors if GQ.of(r) == pole)
    if m == 0:
        return ZERO
    series = shift(num, pole)[:m] + [ZERO] * max(0, m - len(num))
    for r, k in den_factors:
        r = GQ.of(r)
        if r == pole:
            continue
        d = pole - r
        # (d + s)^(-k) = d^(-k) sum_n C(-k, n) (s/d)^n
        dinv = d.inverse()
        base = dinv**k
        fac = [base * ((-1) ** n * comb(k + n - 1, n)) * (dinv**n) for n in range(m)]
        series = _series_mul(series, fac, m)
    return series[m - 1]
