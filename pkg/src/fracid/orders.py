"""Exact rational commensurate orders.

The w-plane substitution w = s^q only makes sense when q is carried as an
exact rational: re-basing two transfer functions onto a shared order takes a
gcd of fractions, and any floating-point representation of q would create
spurious Riemann sheets. Backed by :class:`fractions.Fraction`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .exceptions import ValidationError


@dataclass(frozen=True)
class RationalOrder:
    """A positive rational order q = numerator/denominator in lowest terms."""

    numerator: int
    denominator: int = 1

    def __post_init__(self):
        num, den = self.numerator, self.denominator
        if not isinstance(num, int) or not isinstance(den, int):
            raise ValidationError("RationalOrder fields must be integers")
        if den < 1:
            raise ValidationError(f"denominator must be >= 1, got {den}")
        if num <= 0:
            raise ValidationError(f"order must be positive, got {num}/{den}")
        g = math.gcd(num, den)
        object.__setattr__(self, "numerator", num // g)
        object.__setattr__(self, "denominator", den // g)

    @classmethod
    def parse(cls, value) -> "RationalOrder":
        """Accept RationalOrder, Fraction, int, 'p/r' or decimal strings, floats.

        Floats go through their shortest decimal repr, so 0.25 -> 1/4 and
        0.1 -> 1/10 rather than the raw binary expansions.
        """
        if isinstance(value, RationalOrder):
            return value
        if isinstance(value, Fraction):
            return cls(value.numerator, value.denominator)
        if isinstance(value, bool):
            raise ValidationError("order must be a number or fraction string")
        if isinstance(value, int):
            return cls(value, 1)
        if isinstance(value, float):
            frac = Fraction(repr(value))
            return cls(frac.numerator, frac.denominator)
        if isinstance(value, str):
            text = value.strip()
            try:
                frac = Fraction(text)
            except (ValueError, ZeroDivisionError) as exc:
                raise ValidationError(f"cannot parse order {value!r}") from exc
            return cls(frac.numerator, frac.denominator)
        raise ValidationError(f"cannot parse order from {type(value).__name__}")

    def as_fraction(self) -> Fraction:
        return Fraction(self.numerator, self.denominator)

    def __float__(self) -> float:
        return self.numerator / self.denominator

    def __str__(self) -> str:
        if self.denominator == 1:
            return str(self.numerator)
        return f"{self.numerator}/{self.denominator}"

    def check_commensurate_base(self) -> "RationalOrder":
        """Commensurate bases live in (0, 1]."""
        if self.as_fraction() > 1:
            raise ValidationError(f"commensurate base must be in (0, 1], got {self}")
        return self


def order_gcd(a: RationalOrder, b: RationalOrder) -> RationalOrder:
    """Exact gcd of two rational orders: gcd(p1/r1, p2/r2) = gcd(p1,p2)/lcm(r1,r2)."""
    num = math.gcd(a.numerator, b.numerator)
    den = (a.denominator * b.denominator) // math.gcd(a.denominator, b.denominator)
    return RationalOrder(num, den)


def respace_factor(old: RationalOrder, new: RationalOrder) -> int:
    """Integer k such that old = k * new; error if new does not divide old."""
    ratio = old.as_fraction() / new.as_fraction()
    if ratio.denominator != 1:
        raise ValidationError(f"order {new} does not divide {old}")
    return int(ratio)
