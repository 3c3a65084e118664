"""Exact arithmetic for Beatty-sequence slopes.

A slope is either a rational p/q or a quadratic irrational (a + b*sqrt(d))/c
with d > 0 non-square.  All floor computations run in integer arithmetic, so
the combinatorics of the point sets (gap values, counting identities) hold
exactly; floats only appear when positions are handed to numerics.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction

from .errors import DomainError

_RAT_RE = re.compile(r"^\s*(-?\d+)\s*/\s*(-?\d+)\s*$")
_QUAD_RE = re.compile(
    r"^\s*\(\s*(-?\d+)\s*([+-])\s*(\d+)\s*(?:√|sqrt)\s*\(?\s*(\d+)\s*\)?\s*\)"
    r"\s*/\s*(-?\d+)\s*$"
)


def _floor_sqrt_mult(b: int, d: int) -> int:
    """floor(b*sqrt(d)) for integer b and non-square d > 0."""
    if b == 0:
        return 0
    s = math.isqrt(b * b * d)
    if b > 0:
        return s
    # b*sqrt(d) is irrational here, so it is never an exact integer
    return -s - 1


def _sign_quad(A: int, B: int, d: int) -> int:
    """Sign of A + B*sqrt(d), with d non-square (zero only when A == B == 0)."""
    if B == 0:
        return (A > 0) - (A < 0)
    if A == 0:
        return (B > 0) - (B < 0)
    if A > 0 and B > 0:
        return 1
    if A < 0 and B < 0:
        return -1
    lhs, rhs = A * A, B * B * d
    if A > 0:  # B < 0: positive iff A^2 > B^2 d
        return (lhs > rhs) - (lhs < rhs)
    return (rhs > lhs) - (rhs < lhs)


@dataclass(frozen=True)
class AlphaValue:
    """The value (a + b*sqrt(d))/c; rational exactly when b == 0.

    Use :meth:`rational`, :meth:`quadratic` or :meth:`parse` rather than the
    raw constructor; they normalize the representation (c > 0, square d folded
    into the rational part, reduced fractions).
    """

    a: int
    b: int
    c: int
    d: int

    def __post_init__(self):
        if self.c <= 0:
            raise DomainError("denominator must be normalized positive")
        if self.b != 0:
            if self.d <= 0 or math.isqrt(self.d) ** 2 == self.d:
                raise DomainError("quadratic part requires non-square d > 0")
        if not (self._sign_minus(0) > 0 and self._sign_minus(1) < 0):
            raise DomainError("alpha must lie strictly in (0, 1)")

    def _sign_minus(self, k: int) -> int:
        # sign of (alpha - k) = sign of (a - k c) + b sqrt(d), since c > 0
        return _sign_quad(self.a - k * self.c, self.b, self.d if self.d else 2)

    # -- constructors ------------------------------------------------------

    @classmethod
    def rational(cls, p: int, q: int) -> "AlphaValue":
        f = Fraction(p, q)
        return cls(f.numerator, 0, f.denominator, 0)

    @classmethod
    def quadratic(cls, a: int, b: int, d: int, c: int) -> "AlphaValue":
        if c == 0:
            raise DomainError("denominator must be nonzero")
        if c < 0:
            a, b, c = -a, -b, -c
        if d < 0:
            raise DomainError("d must be positive")
        s = math.isqrt(d)
        if b == 0 or s * s == d:
            return cls.rational(a + b * s, c)
        g = math.gcd(math.gcd(abs(a), abs(b)), c)
        return cls(a // g, b // g, c // g, d)

    @classmethod
    def parse(cls, text: str) -> "AlphaValue":
        m = _RAT_RE.match(text)
        if m:
            return cls.rational(int(m.group(1)), int(m.group(2)))
        m = _QUAD_RE.match(text)
        if m:
            a, sign, b, d, c = m.groups()
            bval = int(b) if sign == "+" else -int(b)
            return cls.quadratic(int(a), bval, int(d), int(c))
        raise DomainError(f"cannot parse slope {text!r}; use 'p/q' or '(a+b√d)/c'")

    @classmethod
    def fibonacci(cls) -> "AlphaValue":
        """(sqrt(5) - 1)/2, the golden rotation number."""
        return cls.quadratic(-1, 1, 5, 2)

    # -- exact queries ------------------------------------------------------

    @property
    def is_rational(self) -> bool:
        return self.b == 0

    def floor_mul(self, n: int) -> int:
        """floor(n * alpha), exact."""
        A = n * self.a
        if self.b == 0:
            return A // self.c
        F = A + _floor_sqrt_mult(n * self.b, self.d)
        return F // self.c

    def mul_ge(self, n: int, m: int) -> bool:
        """Exact test n * alpha >= m."""
        return _sign_quad(n * self.a - m * self.c, n * self.b, self.d if self.d else 2) >= 0

    def inv_floor(self) -> int:
        """floor(1/alpha), exact; the short gap of the point set."""
        if self.b == 0:
            return self.c // self.a
        # 1/alpha = c(a - b sqrt d) / (a^2 - b^2 d)
        A, B, C = self.c * self.a, -self.c * self.b, self.a * self.a - self.b * self.b * self.d
        if C < 0:
            A, B, C = -A, -B, -C
        return (A + _floor_sqrt_mult(B, self.d)) // C

    def max_gap(self) -> int:
        """Largest possible gap between consecutive set points."""
        if self.is_rational and self.a == 1:
            # alpha = 1/q: arithmetic progression, single gap q
            return self.c
        return self.inv_floor() + 1

    def membership_range(self, lo: int, hi: int):
        """Boolean list: n in the Beatty set for n = lo..hi (inclusive).

        Incremental: floor(n*alpha) grows by 0 or 1 per unit step, so each
        step costs one exact comparison, never a float.
        """
        out = []
        f = self.floor_mul(lo - 1)
        for n in range(lo, hi + 1):
            if self.mul_ge(n, f + 1):
                f += 1
                out.append(True)
            else:
                out.append(False)
        return out

    # -- float view ---------------------------------------------------------

    @property
    def value(self) -> float:
        if self.b == 0:
            return self.a / self.c
        return (self.a + self.b * math.sqrt(self.d)) / self.c

    def __str__(self) -> str:
        if self.b == 0:
            return f"{self.a}/{self.c}"
        sign = "+" if self.b >= 0 else "-"
        return f"({self.a}{sign}{abs(self.b)}√{self.d})/{self.c}"
