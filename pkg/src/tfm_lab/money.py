"""Exact numeric primitives: fixed-point currency and exact rationals.

All incentive comparisons in this package are exact.  Currency amounts are
integer counts of micro-units (10^-6), probabilities and expected values are
`fractions.Fraction`, and nothing is ever rounded.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

MICRO = 10 ** 6


@dataclass(frozen=True, order=True)
class Money:
    """A currency amount stored as an exact count of 10^-6 units.

    Bids, payments and reserve prices are non-negative; utilities and revenue
    deltas may be negative.  Arithmetic and comparisons are exact.
    """

    micro: int

    def __post_init__(self) -> None:
        if not isinstance(self.micro, int):
            raise TypeError(f"Money micro-units must be int, got {type(self.micro).__name__}")

    @staticmethod
    def of(units: int | str | float) -> "Money":
        """Parse a decimal amount ('7.9', 7, '7.900000') into Money exactly."""
        if isinstance(units, Money):
            return units
        if isinstance(units, int):
            return Money(units * MICRO)
        if isinstance(units, float):
            # floats are accepted only when they are exact in micro-units
            frac = Fraction(str(units)) * MICRO
            if frac.denominator != 1:
                raise ValueError(f"{units!r} is not representable in micro-units")
            return Money(int(frac))
        text = units.strip()
        negative = text.startswith("-")
        if negative:
            text = text[1:]
        if "." in text:
            whole, _, frac_part = text.partition(".")
            if len(frac_part) > 6:
                raise ValueError(f"{units!r} has more than 6 fractional digits")
            frac_part = frac_part.ljust(6, "0")
        else:
            whole, frac_part = text, "000000"
        if not (whole or frac_part):
            raise ValueError(f"cannot parse money amount {units!r}")
        micro = int(whole or "0") * MICRO + int(frac_part)
        return Money(-micro if negative else micro)

    def __str__(self) -> str:
        sign = "-" if self.micro < 0 else ""
        whole, frac = divmod(abs(self.micro), MICRO)
        return f"{sign}{whole}.{frac:06d}"

    def __add__(self, other: "Money") -> "Money":
        return Money(self.micro + other.micro)

    def __sub__(self, other: "Money") -> "Money":
        return Money(self.micro - other.micro)

    def __neg__(self) -> "Money":
        return Money(-self.micro)

    def __mul__(self, factor: int) -> "Money":
        return Money(self.micro * factor)

    __rmul__ = __mul__

    def as_fraction(self) -> Fraction:
        """Value in whole currency units as an exact rational."""
        return Fraction(self.micro, MICRO)

    @property
    def is_negative(self) -> bool:
        return self.micro < 0


ZERO = Money(0)


@dataclass(frozen=True)
class Gamma:
    """Discount factor in [0, 1], stored in lowest terms."""

    numerator: int
    denominator: int

    def __post_init__(self) -> None:
        if self.denominator <= 0:
            raise ValueError("Gamma denominator must be positive")
        if not 0 <= self.numerator <= self.denominator:
            raise ValueError(
                f"Gamma {self.numerator}/{self.denominator} outside [0, 1]"
            )
        frac = Fraction(self.numerator, self.denominator)
        if (frac.numerator, frac.denominator) != (self.numerator, self.denominator):
            raise ValueError(
                f"Gamma {self.numerator}/{self.denominator} not in lowest terms"
            )

    @staticmethod
    def parse(text: str | Fraction | int) -> "Gamma":
        """Parse 'num/den' (or a bare integer / Fraction) into a Gamma."""
        if isinstance(text, Gamma):
            return text
        frac = Fraction(text)
        return Gamma(frac.numerator, frac.denominator)

    def as_fraction(self) -> Fraction:
        return Fraction(self.numerator, self.denominator)

    def __str__(self) -> str:
        return f"{self.numerator}/{self.denominator}"


GAMMA_ZERO = Gamma(0, 1)
GAMMA_ONE = Gamma(1, 1)


def rat_to_str(value: Fraction) -> str:
    """Serialize an exact rational as 'num/den' (never a float)."""
    return f"{value.numerator}/{value.denominator}"


def rat_from_str(text: str) -> Fraction:
    num, _, den = text.partition("/")
    return Fraction(int(num), int(den) if den else 1)
