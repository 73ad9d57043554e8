"""Exact arithmetic in the rational function field Q(q).

A :class:`QScalar` stores ``q**shift * num(q) / den(q)`` with integer polynomials
``num`` and ``den`` held as :class:`flint.fmpz_poly`.  The representation is
canonical, so two scalars are equal iff their stored triples are equal:

* ``num`` and ``den`` are coprime and neither is divisible by ``q``;
* the combined content ``gcd(content(num), content(den))`` is 1;
* ``den`` has a positive leading coefficient;
* zero is ``(0, 1, 0)``.

Negative powers of ``q`` therefore live in the numerator as a Laurent shift and
denominators are ordinary polynomials with nonzero constant term.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from numbers import Rational
from typing import Union

import flint

__all__ = [
    "DivisionByZero",
    "PoleAtSpecialization",
    "QScalar",
    "ScalarParseError",
    "conjugate",
    "normalize",
    "parse_qscalar",
    "q",
    "specialize",
]


class DivisionByZero(ZeroDivisionError):
    """Raised when a zero denominator or zero divisor is encountered."""


class PoleAtSpecialization(ValueError):
    """Raised when a scalar is evaluated at one of its poles."""


class ScalarParseError(ValueError):
    pass


_ONE_POLY = flint.fmpz_poly([1])
_ZERO_POLY = flint.fmpz_poly([])


def _low_order(p: flint.fmpz_poly) -> int:
    for k, c in enumerate(p.coeffs()):
        if c != 0:
            return k
    return 0


def _canon(num: flint.fmpz_poly, den: flint.fmpz_poly, shift: int) -> "QScalar":
    if den.is_zero():
        raise DivisionByZero("zero denominator")
    if num.is_zero():
        return _ZERO
    k = _low_order(num)
    if k:
        num = num.right_shift(k)
        shift += k
    k = _low_order(den)
    if k:
        den = den.right_shift(k)
        shift -= k
    if not den.is_one():
        g = num.gcd(den)
        if not g.is_one():
            num = num // g
            den = den // g
        c = flint.fmpz(math.gcd(int(num.content()), int(den.content())))
        if den.leading_coefficient() < 0:
            c = -c
        if c != 1:
            num = flint.fmpz_poly([x // c for x in num.coeffs()])
            den = flint.fmpz_poly([x // c for x in den.coeffs()])
    return QScalar._raw(num, den, shift)


Coercible = Union["QScalar", int, Fraction]


class QScalar:
    """An element of Q(q) in canonical form.  Immutable."""

    __slots__ = ("_num", "_den", "_shift", "_hash")

    def __init__(self, value: Coercible | str = 0):
        if isinstance(value, QScalar):
            src = value
        elif isinstance(value, str):
            src = parse_qscalar(value)
        else:
            src = _from_rational(value)
        self._num = src._num
        self._den = src._den
        self._shift = src._shift
        self._hash = None

    @classmethod
    def _raw(cls, num, den, shift) -> "QScalar":
        obj = object.__new__(cls)
        obj._num = num
        obj._den = den
        obj._shift = shift
        obj._hash = None
        return obj

    @classmethod
    def monomial(cls, coeff: int | Fraction, exponent: int) -> "QScalar":
        c = Fraction(coeff)
        return _canon(flint.fmpz_poly([c.numerator]), flint.fmpz_poly([c.denominator]), exponent)

    @classmethod
    def from_laurent(cls, coeffs: dict[int, int | Fraction]) -> "QScalar":
        """Build ``sum(c * q**e)`` from an exponent -> coefficient map."""
        out = _ZERO
        for e, c in coeffs.items():
            out = out + cls.monomial(c, e)
        return out

    # -- accessors -----------------------------------------------------------

    @property
    def numerator(self) -> flint.fmpz_poly:
        return self._num

    @property
    def denominator(self) -> flint.fmpz_poly:
        return self._den

    @property
    def shift(self) -> int:
        return self._shift

    def is_zero(self) -> bool:
        return self._num.is_zero()

    def is_one(self) -> bool:
        return self._shift == 0 and self._num.is_one() and self._den.is_one()

    def is_laurent(self) -> bool:
        return self._den.is_one()

    def as_monomial(self) -> tuple[Fraction, int] | None:
        """Return ``(c, e)`` if the scalar equals ``c * q**e``, else ``None``."""
        if self.is_zero() or self._num.degree() != 0 or self._den.degree() != 0:
            return None
        return Fraction(int(self._num[0]), int(self._den[0])), self._shift

    def laurent_coeffs(self) -> dict[int, Fraction]:
        if not self._den.is_one():
            raise ValueError(f"{self} is not a Laurent polynomial")
        return {
            self._shift + k: Fraction(int(c))
            for k, c in enumerate(self._num.coeffs())
            if c != 0
        }

    # -- arithmetic ----------------------------------------------------------

    def __add__(self, other):
        o = _coerce(other)
        if o is NotImplemented:
            return o
        if o._num.is_zero():
            return self
        if self._num.is_zero():
            return o
        s = min(self._shift, o._shift)
        n1 = self._num.left_shift(self._shift - s) if self._shift != s else self._num
        n2 = o._num.left_shift(o._shift - s) if o._shift != s else o._num
        if self._den.is_one() and o._den.is_one():
            num = n1 + n2
            if num.is_zero():
                return _ZERO
            k = _low_order(num)
            if k:
                num = num.right_shift(k)
            return QScalar._raw(num, _ONE_POLY, s + k)
        if self._den == o._den:
            return _canon(n1 + n2, self._den, s)
        return _canon(n1 * o._den + n2 * self._den, self._den * o._den, s)

    __radd__ = __add__

    def __neg__(self) -> "QScalar":
        if self._num.is_zero():
            return self
        return QScalar._raw(-self._num, self._den, self._shift)

    def __pos__(self) -> "QScalar":
        return self

    def __sub__(self, other):
        o = _coerce(other)
        if o is NotImplemented:
            return o
        return self + (-o)

    def __rsub__(self, other):
        o = _coerce(other)
        if o is NotImplemented:
            return o
        return o + (-self)

    def __mul__(self, other):
        o = _coerce(other)
        if o is NotImplemented:
            return o
        if self._num.is_zero() or o._num.is_zero():
            return _ZERO
        if self._den.is_one() and o._den.is_one():
            return QScalar._raw(self._num * o._num, _ONE_POLY, self._shift + o._shift)
        return _canon(self._num * o._num, self._den * o._den, self._shift + o._shift)

    __rmul__ = __mul__

    def inverse(self) -> "QScalar":
        if self._num.is_zero():
            raise DivisionByZero("inverse of zero")
        return _canon(self._den, self._num, -self._shift)

    def __truediv__(self, other):
        o = _coerce(other)
        if o is NotImplemented:
            return o
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = _coerce(other)
        if o is NotImplemented:
            return o
        return o * self.inverse()

    def __pow__(self, exponent: int) -> "QScalar":
        if not isinstance(exponent, int):
            return NotImplemented
        if exponent < 0:
            return self.inverse() ** (-exponent)
        if exponent == 0:
            return _ONE
        return _canon(self._num ** exponent, self._den ** exponent, self._shift * exponent)

    # -- comparison / hashing ------------------------------------------------

    def __eq__(self, other) -> bool:
        o = _coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self._shift == o._shift and self._num == o._num and self._den == o._den

    def __ne__(self, other) -> bool:
        eq = self.__eq__(other)
        return eq if eq is NotImplemented else not eq

    def __hash__(self) -> int:
        if self._hash is None:
            if self._den.is_one() and self._num.degree() == 0 and self._shift == 0:
                self._hash = hash(int(self._num[0]))
            else:
                self._hash = hash(
                    (self._shift, tuple(int(c) for c in self._num.coeffs()),
                     tuple(int(c) for c in self._den.coeffs()))
                )
        return self._hash

    def __bool__(self) -> bool:
        return not self._num.is_zero()

    # -- text ----------------------------------------------------------------

    def __str__(self) -> str:
        num = _poly_text(self._num, self._shift)
        if self._den.is_one():
            return num
        den = _poly_text(self._den, 0)
        if _term_count(self._num) > 1:
            num = f"({num})"
        if _term_count(self._den) > 1:
            den = f"({den})"
        return f"{num}/{den}"

    def __repr__(self) -> str:
        return f"QScalar('{self}')"

    def __reduce__(self):
        return (QScalar, (str(self),))

    # -- maps ----------------------------------------------------------------

    def conjugate(self) -> "QScalar":
        # rational coefficients, q real
        return self

    def specialize(self, q0):
        return specialize(self, q0)


def _term_count(p: flint.fmpz_poly) -> int:
    return sum(1 for c in p.coeffs() if c != 0)


def _poly_text(p: flint.fmpz_poly, shift: int) -> str:
    terms = []
    coeffs = p.coeffs()
    for k in range(len(coeffs) - 1, -1, -1):
        c = int(coeffs[k])
        if c == 0:
            continue
        e = k + shift
        mag = abs(c)
        if e == 0:
            body = str(mag)
        else:
            var = "q" if e == 1 else f"q^{e}"
            body = var if mag == 1 else f"{mag}*{var}"
        if not terms:
            terms.append(("-" if c < 0 else "") + body)
        else:
            terms.append(("-" if c < 0 else "+") + body)
    return "".join(terms) if terms else "0"


def _from_rational(value) -> QScalar:
    if isinstance(value, bool):
        value = int(value)
    if isinstance(value, int):
        if value == 0:
            return _ZERO
        return QScalar._raw(flint.fmpz_poly([value]), _ONE_POLY, 0)
    if isinstance(value, (Fraction, Rational)):
        f = Fraction(value)
        return _canon(flint.fmpz_poly([f.numerator]), flint.fmpz_poly([f.denominator]), 0)
    raise TypeError(f"cannot convert {type(value).__name__} to QScalar")


def _coerce(value):
    if isinstance(value, QScalar):
        return value
    if isinstance(value, (int, Fraction, Rational)):
        return _from_rational(value)
    return NotImplemented


_ZERO = QScalar._raw(_ZERO_POLY, _ONE_POLY, 0)
_ONE = QScalar._raw(_ONE_POLY, _ONE_POLY, 0)

#: the deformation parameter
q = QScalar._raw(_ONE_POLY, _ONE_POLY, 1)


def normalize(numerator, denominator=1) -> QScalar:
    """Canonical QScalar for ``numerator / denominator``.

    Either argument may be a QScalar, an integer, a Fraction, or text.
    """
    n = numerator if isinstance(numerator, QScalar) else QScalar(numerator)
    d = denominator if isinstance(denominator, QScalar) else QScalar(denominator)
    if d.is_zero():
        raise DivisionByZero("zero denominator")
    return n / d


def conjugate(s: QScalar) -> QScalar:
    """Complex conjugation.  The identity, since q is real and coefficients rational."""
    return s.conjugate() if isinstance(s, QScalar) else s


def _eval_poly(p: flint.fmpz_poly, x):
    acc = 0 * x
    for c in reversed(p.coeffs()):
        acc = acc * x + int(c)
    return acc


def specialize(s, q0):
    """Evaluate ``s`` at ``q = q0``.

    Exact for int/Fraction ``q0`` (returns a Fraction), floating for float ``q0``.
    """
    if not isinstance(s, QScalar):
        s = _coerce(s)
    if isinstance(q0, float):
        x = q0
    else:
        x = Fraction(q0)
    if s.is_zero():
        return 0.0 if isinstance(x, float) else Fraction(0)
    den = _eval_poly(s._den, x)
    if den == 0:
        raise PoleAtSpecialization(f"{s} has a pole at q={q0}")
    if x == 0:
        if s._shift < 0:
            raise PoleAtSpecialization(f"{s} has a pole at q=0")
        if s._shift > 0:
            return 0.0 if isinstance(x, float) else Fraction(0)
    num = _eval_poly(s._num, x)
    return num * x ** s._shift / den


# -- parsing -------------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(\d+)|(q)|(\*\*|[-+*/^()]))")


def _tokenize(text: str) -> list[str]:
    pos, out = 0, []
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ScalarParseError(f"unexpected input at {text[pos:]!r}")
        out.append(m.group(m.lastindex))
        pos = m.end()
    return out


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0
        self.text = text

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else None

    def take(self, expected=None):
        tok = self.peek()
        if tok is None or (expected is not None and tok != expected):
            raise ScalarParseError(f"expected {expected or 'token'} in {self.text!r}")
        self.i += 1
        return tok

    def parse(self) -> QScalar:
        if not self.toks:
            raise ScalarParseError("empty scalar text")
        val = self.expr()
        if self.peek() is not None:
            raise ScalarParseError(f"trailing input in {self.text!r}")
        return val

    def expr(self) -> QScalar:
        val = self.term()
        while self.peek() in ("+", "-"):
            op = self.take()
            rhs = self.term()
            val = val + rhs if op == "+" else val - rhs
        return val

    def term(self) -> QScalar:
        val = self.unary()
        while self.peek() in ("*", "/"):
            op = self.take()
            rhs = self.unary()
            if op == "*":
                val = val * rhs
            else:
                if rhs.is_zero():
                    raise DivisionByZero(f"division by zero in {self.text!r}")
                val = val / rhs
        return val

    def unary(self) -> QScalar:
        tok = self.peek()
        if tok == "-":
            self.take()
            return -self.unary()
        if tok == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self) -> QScalar:
        base = self.atom()
        if self.peek() in ("^", "**"):
            self.take()
            exp = self.exponent()
            if exp < 0 and base.is_zero():
                raise DivisionByZero("negative power of zero")
            base = base ** exp
        return base

    def exponent(self) -> int:
        sign = 1
        paren = False
        if self.peek() == "(":
            self.take()
            paren = True
        while self.peek() in ("-", "+"):
            if self.take() == "-":
                sign = -sign
        tok = self.take()
        if not tok.isdigit():
            raise ScalarParseError(f"integer exponent expected in {self.text!r}")
        if paren:
            self.take(")")
        return sign * int(tok)

    def atom(self) -> QScalar:
        tok = self.take()
        if tok.isdigit():
            return _from_rational(int(tok))
        if tok == "q":
            return q
        if tok == "(":
            val = self.expr()
            self.take(")")
            return val
        raise ScalarParseError(f"unexpected {tok!r} in {self.text!r}")


def parse_qscalar(text: str) -> QScalar:
    """Parse text such as ``"(q^2-1)/(q+1)"`` or ``"3+q^-2"``."""
    return _Parser(text).parse()
