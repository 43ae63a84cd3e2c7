"""Exact arithmetic on the unit interval of the field of rational functions
of a positive infinitesimal ``e``.

Values are reduced fractions of dense coefficient polynomials over exact
rationals.  The order is decided structurally from the sign of the
lowest-order coefficient of a difference; no floating point is used
anywhere.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Iterable, Sequence, Union

RationalLike = Union[int, Fraction]

# ---------------------------------------------------------------------------
# dense polynomial helpers (tuple of Fraction, index = power of e, trimmed)
# ---------------------------------------------------------------------------


def _trim(p: Sequence[Fraction]) -> tuple[Fraction, ...]:
    p = list(p)
    while p and p[-1] == 0:
        p.pop()
    return tuple(p)


def _padd(a, b):
    n = max(len(a), len(b))
    return _trim(
        tuple(
            (a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0)
            for i in range(n)
        )
    )


def _pneg(a):
    return tuple(-c for c in a)


def _pmul(a, b):
    if not a or not b:
        return ()
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, ca in enumerate(a):
        for j, cb in enumerate(b):
            out[i + j] += ca * cb
    return _trim(out)


def _pscale(a, c: Fraction):
    if c == 0:
        return ()
    return tuple(x * c for x in a)


def _pdivmod(a, b):
    # b must be nonzero
    a = list(a)
    q = [Fraction(0)] * max(len(a) - len(b) + 1, 0)
    lead = b[-1]
    while len(a) >= len(b) and any(c != 0 for c in a):
        while a and a[-1] == 0:
            a.pop()
        if len(a) < len(b):
            break
        k = len(a) - len(b)
        c = a[-1] / lead
        q[k] = c
        for i, cb in enumerate(b):
            a[k + i] -= c * cb
    return _trim(q), _trim(a)


def _pgcd(a, b):
    a, b = _trim(a), _trim(b)
    while b:
        _, r = _pdivmod(a, b)
        a, b = b, r
    if not a:
        return ()
    return tuple(c / a[-1] for c in a)  # monic


def _order(p) -> int:
    for i, c in enumerate(p):
        if c != 0:
            return i
    raise ValueError("zero polynomial has no order")


class QEps:
    """An element of the rational-function field in one infinitesimal.

    Canonical form: numerator/denominator polynomials with trivial gcd and
    the denominator's lowest-order nonzero coefficient scaled to 1, so equal
    rational functions have identical representations.  Zero is uniquely
    ``0/1``.
    """

    __slots__ = ("num", "den")

    def __init__(
        self,
        num: Iterable[RationalLike] = (),
        den: Iterable[RationalLike] = (1,),
    ):
        n = _trim(tuple(Fraction(c) for c in num))
        d = _trim(tuple(Fraction(c) for c in den))
        if not d:
            raise ZeroDivisionError("zero denominator polynomial")
        if not n:
            object.__setattr__(self, "num", ())
            object.__setattr__(self, "den", (Fraction(1),))
            return
        g = _pgcd(n, d)
        if len(g) > 1 or g[0] != 1:
            n, _ = _pdivmod(n, g)
            d, _ = _pdivmod(d, g)
        c = d[_order(d)]
        if c != 1:
            n = _pscale(n, 1 / c)
            d = _pscale(d, 1 / c)
        object.__setattr__(self, "num", n)
        object.__setattr__(self, "den", d)

    def __setattr__(self, *a):  # immutable
        raise AttributeError("QEps values are immutable")

    # -- constructors -------------------------------------------------------

    @classmethod
    def from_rational(cls, r: RationalLike) -> "QEps":
        return cls((Fraction(r),))

    @classmethod
    def epsilon(cls, power: int = 1) -> "QEps":
        return cls((0,) * power + (1,))

    @classmethod
    def from_monomials(cls, num, den=((Fraction(1), 0),)) -> "QEps":
        """Build from ``(coefficient, power)`` pairs for numerator/denominator."""

        def poly(monos):
            monos = list(monos)
            size = max((p for _, p in monos), default=0) + 1
            out = [Fraction(0)] * size
            for c, p in monos:
                if p < 0:
                    raise ValueError("negative powers of e are not accepted")
                out[p] += Fraction(c)
            return out

        return cls(poly(num), poly(den))

    # -- predicates ----------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self.num

    @property
    def is_rational(self) -> bool:
        return len(self.num) <= 1 and self.den == (Fraction(1),)

    @property
    def shift(self) -> int:
        """Net power of e factored out (negative for infinite elements)."""
        if self.is_zero:
            return 0
        return _order(self.num) - _order(self.den)

    def as_rational(self) -> Fraction:
        if not self.is_rational:
            raise ValueError(f"{self} is not rational")
        return self.num[0] if self.num else Fraction(0)

    # -- field operations ----------------------------------------------------

    def __add__(self, other: "QEps") -> "QEps":
        other = _coerce(other)
        return QEps(
            _padd(_pmul(self.num, other.den), _pmul(other.num, self.den)),
            _pmul(self.den, other.den),
        )

    __radd__ = __add__

    def __neg__(self) -> "QEps":
        return QEps(_pneg(self.num), self.den)

    def __sub__(self, other) -> "QEps":
        return self + (-_coerce(other))

    def __rsub__(self, other) -> "QEps":
        return _coerce(other) + (-self)

    def __mul__(self, other) -> "QEps":
        other = _coerce(other)
        return QEps(_pmul(self.num, other.num), _pmul(self.den, other.den))

    __rmul__ = __mul__

    def inverse(self) -> "QEps":
        if self.is_zero:
            raise ZeroDivisionError("inverse of zero")
        return QEps(self.den, self.num)

    def __truediv__(self, other) -> "QEps":
        return self * _coerce(other).inverse()

    def __rtruediv__(self, other) -> "QEps":
        return _coerce(other) * self.inverse()

    def __pow__(self, n: int) -> "QEps":
        if n < 0:
            return self.inverse() ** (-n)
        out = ONE
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    # -- order ----------------------------------------------------------------

    def compare(self, other) -> int:
        """-1, 0 or 1: the sign of ``self - other`` for small positive e."""
        d = self - _coerce(other)
        if d.is_zero:
            return 0
        # the denominator's lowest-order coefficient is 1 by normalization
        return 1 if d.num[_order(d.num)] > 0 else -1

    def __eq__(self, other):
        if not isinstance(other, (QEps, int, Fraction)):
            return NotImplemented
        other = _coerce(other)
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        return hash((self.num, self.den))

    def __lt__(self, other):
        return self.compare(other) < 0

    def __le__(self, other):
        return self.compare(other) <= 0

    def __gt__(self, other):
        return self.compare(other) > 0

    def __ge__(self, other):
        return self.compare(other) >= 0

    # -- standard part & approximation ----------------------------------------

    @property
    def is_finite(self) -> bool:
        return self.is_zero or self.shift >= 0

    def std_part(self) -> Fraction:
        """The rational limit as e goes to 0 from above."""
        if self.is_zero:
            return Fraction(0)
        s = self.shift
        if s > 0:
            return Fraction(0)
        if s < 0:
            raise ValueError(f"{self} is infinite and has no standard part")
        o = _order(self.num)
        return self.num[o] / self.den[o]

    @property
    def is_infinitesimal(self) -> bool:
        return not self.is_zero and self.shift > 0

    def approx_eq(self, r: RationalLike) -> bool:
        """True iff the value is within 1/n of the rational r for every n."""
        d = self - QEps.from_rational(r)
        return d.is_zero or d.is_infinitesimal

    def in_unit_interval(self) -> bool:
        return ZERO <= self <= ONE

    # -- text ------------------------------------------------------------------

    def __str__(self) -> str:
        if self.den == (Fraction(1),):
            return _poly_str(self.num)
        return f"({_poly_str(self.num)})/({_poly_str(self.den)})"

    def __repr__(self) -> str:
        return f"QEps({self})"


def _coerce(x) -> QEps:
    if isinstance(x, QEps):
        return x
    if isinstance(x, (int, Fraction)):
        return QEps.from_rational(x)
    raise TypeError(f"cannot coerce {x!r} to QEps")


def _poly_str(p) -> str:
    if not p:
        return "0"
    parts = []
    for i, c in enumerate(p):
        if c == 0:
            continue
        if i == 0:
            parts.append(str(c))
        elif i == 1:
            parts.append(f"{c} e")
        else:
            parts.append(f"{c} e^{i}")
    return " + ".join(parts)


ZERO = QEps()
ONE = QEps.from_rational(1)
EPS = QEps.epsilon()


# ---------------------------------------------------------------------------
# literal grammar:
#   rational := int | int "/" posint
#   monomial := rational | rational "e" | rational "e^" posint
#   poly     := monomial ("+" monomial)*
#   qeps     := poly | "(" poly ")" "/" "(" poly ")"
# ---------------------------------------------------------------------------

_TOKEN = re.compile(r"\s*(-?\d+|[()/^+]|e)")


class QEpsParseError(ValueError):
    pass


class _Lit:
    def __init__(self, text: str):
        self.toks: list[str] = []
        pos = 0
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if not m:
                if text[pos:].strip():
                    raise QEpsParseError(f"bad character in literal: {text[pos:]!r}")
                break
            self.toks.append(m.group(1))
            pos = m.end()
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else None

    def next(self):
        t = self.peek()
        if t is None:
            raise QEpsParseError("unexpected end of literal")
        self.i += 1
        return t

    def expect(self, t):
        got = self.next()
        if got != t:
            raise QEpsParseError(f"expected {t!r}, got {got!r}")

    def rational(self) -> Fraction:
        t = self.next()
        try:
            n = int(t)
        except ValueError:
            raise QEpsParseError(f"expected integer, got {t!r}") from None
        if self.peek() == "/":
            self.next()
            tok = self.next()
            try:
                d = int(tok)
            except ValueError:
                raise QEpsParseError(f"expected integer, got {tok!r}") from None
            if d <= 0:
                raise QEpsParseError("denominator must be positive")
            return Fraction(n, d)
        return Fraction(n)

    def poly(self) -> list[tuple[Fraction, int]]:
        monos = [self.monomial()]
        while self.peek() == "+":
            self.next()
            monos.append(self.monomial())
        return monos

    def monomial(self) -> tuple[Fraction, int]:
        c = self.rational()
        if self.peek() == "e":
            self.next()
            if self.peek() == "^":
                self.next()
                p = int(self.next())
                if p <= 0:
                    raise QEpsParseError("e power must be positive")
                return (c, p)
            return (c, 1)
        return (c, 0)


def parse_qeps(text: str) -> QEps:
    """Parse a value in the literal grammar, e.g. ``(1 + 2 e)/(2 + 1 e)``."""
    lit = _Lit(text)
    if lit.peek() == "(":
        lit.next()
        num = lit.poly()
        lit.expect(")")
        lit.expect("/")
        lit.expect("(")
        den = lit.poly()
        lit.expect(")")
        value = QEps.from_monomials(num, den)
    else:
        value = QEps.from_monomials(lit.poly())
    if lit.peek() is not None:
        raise QEpsParseError(f"trailing input in literal: {lit.toks[lit.i:]}")
    return value
