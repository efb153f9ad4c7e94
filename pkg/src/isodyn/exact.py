"""Exact Gaussian-rational arithmetic for symbolic coefficients.

Every coefficient in the symbolic layer is a + b*i with a, b rational.
No floating point enters the algebra; floats appear only in numeric
oracles that cross-check symbolic results.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Union

RatLike = Union[int, Fraction, "GaussRat"]


class GaussRat:
    """A Gaussian rational a + b*i with exact Fraction components."""

    __slots__ = ("re", "im")

    def __init__(self, re: int | Fraction = 0, im: int | Fraction = 0):
        object.__setattr__(self, "re", Fraction(re))
        object.__setattr__(self, "im", Fraction(im))

    def __setattr__(self, name, value):  # immutable
        raise AttributeError("GaussRat is immutable")

    @staticmethod
    def coerce(x: RatLike) -> "GaussRat":
        if isinstance(x, GaussRat):
            return x
        if isinstance(x, (int, Fraction)):
            return GaussRat(x)
        raise TypeError(f"cannot coerce {type(x).__name__} to GaussRat")

    def __add__(self, other: RatLike):
        if not isinstance(other, (int, Fraction, GaussRat)):
            return NotImplemented
        o = GaussRat.coerce(other)
        return GaussRat(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other: RatLike):
        if not isinstance(other, (int, Fraction, GaussRat)):
            return NotImplemented
        o = GaussRat.coerce(other)
        return GaussRat(self.re - o.re, self.im - o.im)

    def __rsub__(self, other: RatLike):
        if not isinstance(other, (int, Fraction, GaussRat)):
            return NotImplemented
        return GaussRat.coerce(other) - self

    def __neg__(self) -> "GaussRat":
        return GaussRat(-self.re, -self.im)

    def __mul__(self, other: RatLike):
        if not isinstance(other, (int, Fraction, GaussRat)):
            return NotImplemented
        o = GaussRat.coerce(other)
        return GaussRat(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other: RatLike) -> "GaussRat":
        o = GaussRat.coerce(other)
        n = o.re * o.re + o.im * o.im
        if n == 0:
            raise ZeroDivisionError("division by zero GaussRat")
        return GaussRat((self.re * o.re + self.im * o.im) / n, (self.im * o.re - self.re * o.im) / n)

    def __rtruediv__(self, other: RatLike) -> "GaussRat":
        return GaussRat.coerce(other) / self

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction, GaussRat)):
            o = GaussRat.coerce(other)
            return self.re == o.re and self.im == o.im
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.re, self.im))

    def __bool__(self) -> bool:
        return self.re != 0 or self.im != 0

    def is_zero(self) -> bool:
        return not self

    def conjugate(self) -> "GaussRat":
        return GaussRat(self.re, -self.im)

    def as_complex(self) -> complex:
        return float(self.re) + 1j * float(self.im)

    def __repr__(self) -> str:
        return f"GaussRat({self.re!r}, {self.im!r})"

    def __str__(self) -> str:
        if self.im == 0:
            return str(self.re)
        if self.re == 0:
            return f"{self.im}*i"
        sign = "+" if self.im > 0 else "-"
        return f"{self.re}{sign}{abs(self.im)}*i"

    def to_json(self) -> list[str]:
        return [str(self.re), str(self.im)]

    @staticmethod
    def from_json(obj) -> "GaussRat":
        return GaussRat(Fraction(obj[0]), Fraction(obj[1]))


ZERO = GaussRat(0)
ONE = GaussRat(1)
I = GaussRat(0, 1)
