"""Exact univariate rational functions of x over Q.

Just enough arithmetic for formal-in-time solutions: ring operations,
differentiation, normalization (monic denominator, gcd-reduced), and exact
equality.  Polynomials are dense coefficient tuples in ascending powers.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

Poly = tuple[Fraction, ...]


def _trim(p: Sequence[Fraction]) -> Poly:
    p = list(p)
    while p and not p[-1]:
        p.pop()
    return tuple(p)


def _padd(a: Poly, b: Poly) -> Poly:
    n = max(len(a), len(b))
    return _trim([(a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0)
                  for i in range(n)])


def _pneg(a: Poly) -> Poly:
    return tuple(-x for x in a)


def _pmul(a: Poly, b: Poly) -> Poly:
    if not a or not b:
        return ()
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if not x:
            continue
        for j, y in enumerate(b):
            if y:
                out[i + j] += x * y
    return _trim(out)


def _pdivmod(a: Poly, b: Poly) -> tuple[Poly, Poly]:
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    a = list(a)
    q = [Fraction(0)] * max(0, len(a) - len(b) + 1)
    inv = 1 / b[-1]
    while len(a) >= len(b) and _trim(a):
        a = list(_trim(a))
        if len(a) < len(b):
            break
        c = a[-1] * inv
        d = len(a) - len(b)
        q[d] = c
        for i, y in enumerate(b):
            a[d + i] -= c * y
    return _trim(q), _trim(a)


def _pgcd(a: Poly, b: Poly) -> Poly:
    a, b = _trim(a), _trim(b)
    while b:
        _, r = _pdivmod(a, b)
        a, b = b, r
    if a:
        inv = 1 / a[-1]
        a = tuple(x * inv for x in a)
    return a


def _pdx(a: Poly) -> Poly:
    return _trim([a[i] * i for i in range(1, len(a))])


class RatFunc:
    """num/den with monic reduced denominator."""

    __slots__ = ("num", "den")

    def __init__(self, num: Sequence, den: Sequence = (1,)):
        num = _trim([Fraction(x) for x in num])
        den = _trim([Fraction(x) for x in den])
        if not den:
            raise ZeroDivisionError("zero denominator")
        if not num:
            self.num, self.den = (), (Fraction(1),)
            return
        g = _pgcd(num, den)
        if len(g) > 1:
            num, _ = _pdivmod(num, g)
            den, _ = _pdivmod(den, g)
        lead = den[-1]
        if lead != 1:
            inv = 1 / lead
            num = tuple(x * inv for x in num)
            den = tuple(x * inv for x in den)
        self.num = num
        self.den = den

    @classmethod
    def const(cls, c) -> "RatFunc":
        return cls((Fraction(c),))

    @classmethod
    def x(cls) -> "RatFunc":
        return cls((0, 1))

    def is_zero(self) -> bool:
        return not self.num

    def has_pole_at_zero(self) -> bool:
        return not self.den[0]

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = RatFunc.const(other)
        if not isinstance(other, RatFunc):
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        return hash((self.num, self.den))

    def __add__(self, other) -> "RatFunc":
        if isinstance(other, (int, Fraction)):
            other = RatFunc.const(other)
        num = _padd(_pmul(self.num, other.den), _pmul(other.num, self.den))
        return RatFunc(num, _pmul(self.den, other.den))

    __radd__ = __add__

    def __neg__(self) -> "RatFunc":
        out = object.__new__(RatFunc)
        out.num = _pneg(self.num)
        out.den = self.den
        return out

    def __sub__(self, other) -> "RatFunc":
        if isinstance(other, (int, Fraction)):
            other = RatFunc.const(other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other) -> "RatFunc":
        if isinstance(other, (int, Fraction)):
            return RatFunc(tuple(x * Fraction(other) for x in self.num), self.den)
        return RatFunc(_pmul(self.num, other.num), _pmul(self.den, other.den))

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "RatFunc":
        out = RatFunc.const(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base if n > 1 else base
            n >>= 1
        return out

    def dx(self) -> "RatFunc":
        num = _padd(_pmul(_pdx(self.num), self.den),
                    _pneg(_pmul(self.num, _pdx(self.den))))
        return RatFunc(num, _pmul(self.den, self.den))

    def eval_at_zero(self) -> Fraction:
        if self.has_pole_at_zero():
            raise ZeroDivisionError("pole at the expansion point x = 0")
        num0 = self.num[0] if self.num else Fraction(0)
        return num0 / self.den[0]

    def __repr__(self) -> str:
        def fmt(p: Poly) -> str:
            if not p:
                return "0"
            parts = []
            for i, c in enumerate(p):
                if not c:
                    continue
                if i == 0:
                    parts.append(str(c))
                elif i == 1:
                    parts.append(f"{c}*x" if c != 1 else "x")
                else:
                    parts.append(f"{c}*x^{i}" if c != 1 else f"x^{i}")
            return " + ".join(parts)

        if self.den == (Fraction(1),):
            return fmt(self.num)
        return f"({fmt(self.num)})/({fmt(self.den)})"
