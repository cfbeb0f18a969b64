"""Exact combinatorics and controlled-precision transcendental functions.

Every probability in the package is a :class:`fractions.Fraction`.  Natural
logarithms (and the few ``exp``/``sqrt`` evaluations the bounds need) are
produced as :class:`PrecisionFloat` values: a dyadic/decimal rational that
approximates the true real, together with a rigorous absolute error bound.
The transcendental kernels are the correctly rounded ``ln``, ``exp`` and
``sqrt`` of :mod:`decimal`, evaluated in a private context so no global
state is touched.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import ROUND_HALF_EVEN, Context, Decimal
from fractions import Fraction
from functools import lru_cache
from typing import Sequence, Union

__all__ = [
    "DEFAULT_BITS",
    "PrecisionFloat",
    "binomial",
    "exp_rational",
    "falling_factorial",
    "log_rational",
    "multinomial_coeff",
    "parse_rational",
    "format_rational",
    "sqrt_rational",
]

DEFAULT_BITS = 50

Rational = Union[int, Fraction]


def binomial(n: int, k: int) -> int:
    """C(n, k), with the support convention C(n, k) = 0 for k > n."""
    if n < 0 or k < 0:
        raise ValueError(f"binomial: arguments must be nonnegative, got ({n}, {k})")
    return math.comb(n, k)


def multinomial_coeff(k: int, s: Sequence[int]) -> int:
    """k! / prod(s_j!) for a composition ``s`` of ``k``."""
    if any(x < 0 for x in s):
        raise ValueError(f"multinomial_coeff: negative part in {tuple(s)}")
    if sum(s) != k:
        raise ValueError(f"multinomial_coeff: parts of {tuple(s)} do not sum to {k}")
    result = 1
    remaining = k
    for part in s:
        result *= math.comb(remaining, part)
        remaining -= part
    return result


def falling_factorial(a: int, m: int) -> int:
    """a (a-1) ... (a-m+1); 1 for m = 0 and 0 for m > a."""
    if a < 0 or m < 0:
        raise ValueError(f"falling_factorial: arguments must be nonnegative, got ({a}, {m})")
    return math.perm(a, m)


def parse_rational(text: str | int) -> Fraction:
    """Parse ``"num/den"`` (or an integer) into an exact Fraction.

    Floats are refused so that no binary rounding sneaks in at the I/O
    boundary.
    """
    if isinstance(text, bool) or not isinstance(text, (str, int)):
        raise ValueError(f"expected a rational string like '3/8', got {text!r}")
    if isinstance(text, int):
        return Fraction(text)
    cleaned = text.strip()
    if any(ch in cleaned for ch in ".eE"):
        raise ValueError(f"expected a rational string like '3/8', got {text!r}")
    try:
        return Fraction(cleaned)
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"malformed rational {text!r}") from exc


def format_rational(x: Rational) -> str:
    """Canonical ``num/den`` serialization (denominator always written)."""
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True)
class PrecisionFloat:
    """A real number known to within ``abs_error_bound``.

    ``value`` is stored as an exact rational, so sums and rational rescalings
    add no rounding of their own; only the transcendental constructors
    introduce error.  ``infinite`` marks +inf (e.g. a relative entropy without
    absolute continuity), in which case the other fields are meaningless.
    """

    value: Fraction
    abs_error_bound: Fraction = Fraction(0)
    infinite: bool = False

    @classmethod
    def exact(cls, x: Rational) -> PrecisionFloat:
        return cls(Fraction(x))

    @classmethod
    def inf(cls) -> PrecisionFloat:
        return cls(Fraction(0), Fraction(0), True)

    @property
    def lower(self) -> Fraction:
        if self.infinite:
            raise ValueError("infinite value has no finite lower end")
        return self.value - self.abs_error_bound

    @property
    def upper(self) -> Fraction | None:
        """Upper end of the enclosing interval, ``None`` for +inf."""
        if self.infinite:
            return None
        return self.value + self.abs_error_bound

    def __float__(self) -> float:
        return math.inf if self.infinite else float(self.value)

    def __add__(self, other: PrecisionFloat | Rational) -> PrecisionFloat:
        if not isinstance(other, PrecisionFloat):
            other = PrecisionFloat.exact(other)
        if self.infinite or other.infinite:
            return PrecisionFloat.inf()
        return PrecisionFloat(self.value + other.value, self.abs_error_bound + other.abs_error_bound)

    __radd__ = __add__

    def __neg__(self) -> PrecisionFloat:
        if self.infinite:
            raise ValueError("cannot negate an infinite PrecisionFloat")
        return PrecisionFloat(-self.value, self.abs_error_bound)

    def __sub__(self, other: PrecisionFloat | Rational) -> PrecisionFloat:
        if not isinstance(other, PrecisionFloat):
            other = PrecisionFloat.exact(other)
        return self + (-other)

    def __rsub__(self, other: Rational) -> PrecisionFloat:
        return PrecisionFloat.exact(other) - self

    def __mul__(self, other: PrecisionFloat | Rational) -> PrecisionFloat:
        if not isinstance(other, PrecisionFloat):
            r = Fraction(other)
            if self.infinite:
                if r < 0:
                    raise ValueError("negative multiple of +inf")
                return PrecisionFloat.exact(0) if r == 0 else self
            return PrecisionFloat(self.value * r, self.abs_error_bound * abs(r))
        if self.infinite or other.infinite:
            return PrecisionFloat.inf()
        a, ea, b, eb = self.value, self.abs_error_bound, other.value, other.abs_error_bound
        return PrecisionFloat(a * b, abs(a) * eb + abs(b) * ea + ea * eb)

    __rmul__ = __mul__

    def format(self, digits: int = 15) -> str:
        if self.infinite:
            return "inf"
        return f"{float(self.value):.{digits}g}"


def _digits_for(min_bits: int) -> int:
    # 12 guard bits on top of the requested accuracy, never below ~66 bits.
    return max(20, math.ceil((min_bits + 12) * math.log10(2)) + 2)


def _context(min_bits: int) -> Context:
    return Context(prec=_digits_for(min_bits), rounding=ROUND_HALF_EVEN)


def _as_decimal(ctx: Context, x: Fraction) -> Decimal:
    return ctx.divide(Decimal(x.numerator), Decimal(x.denominator))


def _check_bits(min_bits: int) -> None:
    if min_bits < 1:
        raise ValueError(f"min_bits must be positive, got {min_bits}")


@lru_cache(maxsize=1 << 16)
def _log_reduced(num: int, den: int, min_bits: int) -> PrecisionFloat:
    ctx = _context(min_bits)
    value = Fraction(ctx.ln(_as_decimal(ctx, Fraction(num, den))))
    # Rounding the quotient and rounding ln each cost <= 5*10^-d relative,
    # which sits >= 12 bits below the reported bound.
    return PrecisionFloat(value, Fraction(1, 1 << min_bits) * max(1, abs(value)))


def log_rational(r: Rational, min_bits: int = DEFAULT_BITS) -> PrecisionFloat:
    """Natural logarithm of a positive rational.

    The error bound is ``2**-min_bits * max(1, |result|)``; the same reduced
    rational always yields the identical value.
    """
    _check_bits(min_bits)
    r = Fraction(r)
    if r <= 0:
        raise ValueError(f"log_rational: argument must be positive, got {r}")
    if r == 1:
        return PrecisionFloat.exact(0)
    return _log_reduced(r.numerator, r.denominator, min_bits)


def exp_rational(x: Rational, min_bits: int = DEFAULT_BITS) -> PrecisionFloat:
    """e**x for rational x, error <= 2**-min_bits * max(1, e**x) * (1 + |x|)."""
    _check_bits(min_bits)
    x = Fraction(x)
    if x == 0:
        return PrecisionFloat.exact(1)
    ctx = _context(min_bits)
    value = Fraction(ctx.exp(_as_decimal(ctx, x)))
    bound = Fraction(1, 1 << min_bits) * max(1, value) * (1 + abs(x))
    return PrecisionFloat(value, bound)


def _sqrt_upper(x: Fraction) -> Fraction:
    """A rational upper bound on sqrt(x) for x >= 0."""
    num, den = x.numerator, x.denominator
    return Fraction(math.isqrt(num * den) + 1, den)


def sqrt_rational(x: Rational | PrecisionFloat, min_bits: int = DEFAULT_BITS) -> PrecisionFloat:
    """Square root of a nonnegative rational or of an enclosure of one.

    For an enclosure ``a +/- e`` the propagated error uses
    ``|sqrt(a) - sqrt(b)| <= sqrt(|a - b|)``, which is coarse but needs no
    lower bound on ``a``.
    """
    _check_bits(min_bits)
    if isinstance(x, PrecisionFloat):
        if x.infinite:
            return PrecisionFloat.inf()
        centre, spread = max(x.value, Fraction(0)), x.abs_error_bound
    else:
        centre, spread = Fraction(x), Fraction(0)
        if centre < 0:
            raise ValueError(f"sqrt_rational: negative argument {centre}")
    if centre == 0 and spread == 0:
        return PrecisionFloat.exact(0)
    ctx = _context(min_bits)
    value = Fraction(ctx.sqrt(_as_decimal(ctx, centre)))
    bound = Fraction(1, 1 << min_bits) * max(1, value)
    if spread:
        bound += _sqrt_upper(spread)
    return PrecisionFloat(value, bound)
