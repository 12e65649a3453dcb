"""Exact arithmetic in Q(sqrt(d)) for the irrational guard constants."""
from __future__ import annotations

import math
from fractions import Fraction
from functools import total_ordering

from .valuations import as_fraction


def _sign(p: Fraction, q: Fraction, d: int) -> int:
    """Sign of ``p + q*sqrt(d)``."""
    sp = (p > 0) - (p < 0)
    sq = (q > 0) - (q < 0)
    if sq == 0 or d == 0:
        return sp
    if sp == 0 or sp == sq:
        return sq
    # opposite signs: compare squares
    diff = p * p - q * q * d
    if diff == 0:
        return 0
    return sp if diff > 0 else sq


@total_ordering
class Surd:
    """The number ``p + q*sqrt(d)`` with rational ``p, q`` and integer ``d >= 0``."""

    __slots__ = ("p", "q", "d")

    def __init__(self, p=0, q=0, d: int = 0):
        p, q = as_fraction(p), as_fraction(q)
        if d < 0:
            raise ValueError("d must be non-negative")
        r = math.isqrt(d)
        if r * r == d:
            p, q, d = p + q * r, Fraction(0), 0
        if q == 0:
            d = 0
        self.p, self.q, self.d = p, q, d

    @classmethod
    def sqrt(cls, d) -> "Surd":
        d = as_fraction(d)
        # sqrt(a/b) = sqrt(a*b)/b
        return cls(0, Fraction(1, d.denominator), d.numerator * d.denominator)

    def _lift(self, other) -> "Surd":
        if isinstance(other, Surd):
            if other.d and self.d and other.d != self.d:
                raise ValueError("mixed radicands")
            return other
        return Surd(as_fraction(other))

    def _rad(self, o: "Surd") -> int:
        return self.d or o.d

    def __add__(self, other):
        o = self._lift(other)
        return Surd(self.p + o.p, self.q + o.q, self._rad(o))

    __radd__ = __add__

    def __neg__(self):
        return Surd(-self.p, -self.q, self.d)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        o = self._lift(other)
        d = self._rad(o)
        return Surd(self.p * o.p + self.q * o.q * d, self.p * o.q + self.q * o.p, d)

    __rmul__ = __mul__

    def conjugate(self) -> "Surd":
        return Surd(self.p, -self.q, self.d)

    def __truediv__(self, other):
        o = self._lift(other)
        norm = o.p * o.p - o.q * o.q * o.d
        if norm == 0:
            raise ZeroDivisionError("division by zero surd")
        num = self * o.conjugate()
        return Surd(num.p / norm, num.q / norm, num.d)

    def __rtruediv__(self, other):
        return self._lift(other) / self

    def sign(self) -> int:
        return _sign(self.p, self.q, self.d)

    def __eq__(self, other):
        try:
            return (self - other).sign() == 0
        except (TypeError, ValueError):
            return NotImplemented

    def __lt__(self, other):
        return (self - other).sign() < 0

    def __hash__(self):
        return hash((self.p, self.q, self.d))

    def __float__(self):
        return float(self.p) + float(self.q) * math.sqrt(self.d)

    def is_rational(self) -> bool:
        return self.q == 0

    def upper(self, bits: int = 64) -> Fraction:
        """Smallest multiple of ``2**-bits`` that is ``>= self``."""
        if self.q == 0:
            return self.p
        scale = 1 << bits
        # |q| sqrt(d) scale lies in [r, r + 1) / q.denominator
        r = math.isqrt(self.q.numerator ** 2 * self.d * scale * scale)
        guess = self.p * scale + Fraction(r if self.q > 0 else -r, self.q.denominator)
        k = math.floor(guess)
        while Fraction(k, scale) < self:
            k += 1
        while Fraction(k - 1, scale) >= self:
            k -= 1
        return Fraction(k, scale)

    def __repr__(self):
        if self.q == 0:
            return f"Surd({self.p})"
        return f"Surd({self.p} + {self.q}*sqrt({self.d}))"


def eta(rho) -> Surd:
    """``rho + 1 + sqrt(rho^2 + 4 rho + 1)``."""
    rho = as_fraction(rho)
    return rho + 1 + Surd.sqrt(rho * rho + 4 * rho + 1)


def alpha(rho) -> Surd:
    """``(1 + rho)(2 + rho + sqrt(rho^2 + 4 rho + 1)) - 1``."""
    rho = as_fraction(rho)
    return (1 + rho) * (2 + rho + Surd.sqrt(rho * rho + 4 * rho + 1)) - 1


SQRT6 = Surd.sqrt(6)
