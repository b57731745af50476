"""Exact rationals and dyadic numbers with binary-support analytics.

Rationals are plain :class:`fractions.Fraction` values. A dyadic rational
``m / 2**t`` is stored by its support, the set of exponents carrying a 1 bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from fractions import Fraction
from typing import Iterable

from .errors import EmptySupport, InvalidInput, NotDyadic, NotPositive, OutOfRange

Rational = Fraction


def parse_rational(text) -> Fraction:
    """Parse ``"p/q"`` or ``"p"`` (also accepts ints and Fractions)."""
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int) and not isinstance(text, bool):
        return Fraction(text)
    if not isinstance(text, str):
        raise InvalidInput(f"not a rational literal: {text!r}")
    s = text.strip()
    num, sep, den = s.partition("/")
    try:
        if sep:
            q = int(den)
            if q == 0:
                raise InvalidInput(f"zero denominator in {text!r}")
            return Fraction(int(num), q)
        return Fraction(int(num))
    except ValueError:
        raise InvalidInput(f"not a rational literal: {text!r}") from None


def format_rational(q: Fraction) -> str:
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def parse_rational_list(text: str) -> list[Fraction]:
    return [parse_rational(part) for part in text.split(",") if part.strip()]


def is_power_of_two(n: int) -> bool:
    return n > 0 and n & (n - 1) == 0


@dataclass(frozen=True, order=False)
class Dyadic:
    """Positive dyadic rational given by its support (descending exponents)."""

    support: tuple[int, ...]

    def __post_init__(self):
        canon = tuple(sorted(set(self.support), reverse=True))
        if canon != self.support:
            object.__setattr__(self, "support", canon)

    @classmethod
    def from_support(cls, exps: Iterable[int]) -> "Dyadic":
        exps = tuple(exps)
        if not exps:
            raise EmptySupport("dyadic support must be nonempty")
        if len(set(exps)) != len(exps):
            raise InvalidInput("support exponents must be distinct")
        return cls(exps)

    @property
    def start(self) -> int:
        return self.support[0]

    @property
    def end(self) -> int:
        return self.support[-1]

    @cached_property
    def value(self) -> Fraction:
        if not self.support:
            return Fraction(0)
        low = self.end
        num = sum(1 << (t - low) for t in self.support)
        return Fraction(num << low) if low >= 0 else Fraction(num, 1 << -low)

    def shift(self, by: int) -> "Dyadic":
        """Multiply by ``2**by``."""
        return Dyadic(tuple(t + by for t in self.support))

    def in_unit_window(self) -> bool:
        """True when the value lies in (0, 2)."""
        return bool(self.support) and self.start <= 0

    def phi(self) -> int:
        return phi_even_zero_blocks(self)

    def __str__(self):
        return format_rational(self.value)


def dyadic_from_rational(q) -> Dyadic:
    q = parse_rational(q)
    if q <= 0:
        raise NotPositive(f"{format_rational(q)} is not positive")
    den = q.denominator
    if not is_power_of_two(den):
        raise NotDyadic(f"{format_rational(q)} has a denominator with an odd factor")
    shift = den.bit_length() - 1
    m = q.numerator
    exps = []
    bit = 0
    while m:
        if m & 1:
            exps.append(bit - shift)
        m >>= 1
        bit += 1
    return Dyadic(tuple(reversed(exps)))


def gaps(support: tuple[int, ...]) -> list[int]:
    """Lengths of the zero runs between consecutive 1 bits."""
    return [a - b - 1 for a, b in zip(support, support[1:])]


def phi_even_zero_blocks(x: Dyadic) -> int:
    """Number of maximal zero runs of positive even length between start and end."""
    if not x.support:
        raise EmptySupport("phi is undefined on zero")
    return sum(1 for g in gaps(x.support) if g > 0 and g % 2 == 0)


def phi_of_int(m: int) -> int:
    """phi of the integer ``m`` read in binary; shift invariance makes this
    equal to phi of ``m * 2**t`` for every t."""
    if m <= 0:
        raise EmptySupport("phi is undefined on nonpositive integers")
    m //= m & -m
    count = 0
    run = 0
    m >>= 1
    while m:
        if m & 1:
            if run and run % 2 == 0:
                count += 1
            run = 0
        else:
            run += 1
        m >>= 1
    return count


def dyadic_three_color(x) -> int:
    """Class index of ``x`` in the even-zero-block 3-coloring of D cap (0, 2)."""
    if not isinstance(x, Dyadic):
        x = dyadic_from_rational(x)
    if not x.in_unit_window():
        raise OutOfRange(f"{x} is not in (0, 2)")
    return phi_even_zero_blocks(x) % 3


def ceil_log2(q: Fraction) -> int:
    """Least integer k with 2**k >= q, for positive rational q."""
    q = Fraction(q)
    if q <= 0:
        raise NotPositive("ceil_log2 needs a positive argument")
    k = q.numerator.bit_length() - q.denominator.bit_length()
    while Fraction(2) ** k < q:
        k += 1
    while Fraction(2) ** (k - 1) >= q:
        k -= 1
    return k
