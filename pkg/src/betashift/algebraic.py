"""Exact arithmetic in a real number field Q(beta).

A field is given by a monic integer polynomial with exactly one real root
greater than 1; that root is beta.  Elements are stored in the power basis
1, beta, ..., beta^(d-1) as integer numerators over a common positive
denominator, so every comparison is exact.  The position of beta on the real
line is pinned down by a dyadic isolating interval that is bisected on demand,
and signs are decided by integer interval evaluation.
"""

from __future__ import annotations

import re
import threading
from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Iterable, Sequence, Union

from .errors import (
    DivisionByZero,
    MultipleRootsAboveOne,
    NoRootAboveOne,
    NotInvertible,
    NotMonic,
    NotSquarefree,
    PolynomialSyntaxError,
)

Rational = Union[int, Fraction]

# ---------------------------------------------------------------------------
# dense polynomials over Q, constant coefficient first


def _trim(p: list) -> list:
    while p and p[-1] == 0:
        p.pop()
    return p


def _poly_divmod(a: Sequence, b: Sequence) -> tuple[list, list]:
    a = [Fraction(c) for c in a]
    b = _trim([Fraction(c) for c in b])
    if not b:
        raise DivisionByZero("polynomial division by zero")
    q = [Fraction(0)] * max(len(a) - len(b) + 1, 0)
    lead = b[-1]
    r = _trim(a[:])
    while len(r) >= len(b):
        shift = len(r) - len(b)
        c = r[-1] / lead
        q[shift] = c
        for i, bc in enumerate(b):
            r[shift + i] -= c * bc
        _trim(r)
    return _trim(q), r


def _poly_gcd(a: Sequence, b: Sequence) -> list:
    a = _trim([Fraction(c) for c in a])
    b = _trim([Fraction(c) for c in b])
    while b:
        _, r = _poly_divmod(a, b)
        a, b = b, r
    if not a:
        return a
    lead = a[-1]
    return [c / lead for c in a]


def _poly_mul(a: Sequence, b: Sequence) -> list:
    if not a or not b:
        return []
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return _trim(out)


def _poly_sub(a: Sequence, b: Sequence) -> list:
    n = max(len(a), len(b))
    out = [Fraction(a[i] if i < len(a) else 0) - (b[i] if i < len(b) else 0) for i in range(n)]
    return _trim(out)


def _derivative(p: Sequence) -> list:
    return _trim([Fraction(i * c) for i, c in enumerate(p)][1:])


def _int_eval_scaled(coeffs: Sequence[int], num: int, shift: int) -> int:
    """Return p(num / 2^shift) * 2^(shift*deg) as an integer (Horner)."""
    deg = len(coeffs) - 1
    acc = 0
    for i in range(deg, -1, -1):
        acc = acc * num + coeffs[i] * (1 << (shift * (deg - i)))
    return acc


def _sign(v) -> int:
    return (v > 0) - (v < 0)


# ---------------------------------------------------------------------------
# the defining polynomial


_TERM = re.compile(r"([+-]?)\s*(\d*)\s*(\*?\s*x(?:\s*\^\s*(\d+))?)?")


def parse_polynomial(text: str) -> list[int]:
    """Parse "-1,-1,1" (constant first) or "x^2-x-1" into integer coefficients."""
    text = text.strip()
    if not text:
        raise PolynomialSyntaxError("empty polynomial")
    if "x" not in text:
        try:
            return [int(t) for t in text.split(",")]
        except ValueError as exc:
            raise PolynomialSyntaxError(f"cannot parse coefficient list {text!r}") from exc
    body = text.replace(" ", "")
    coeffs: dict[int, int] = {}
    pos = 0
    while pos < len(body):
        m = _TERM.match(body, pos)
        if m is None or m.end() == pos:
            raise PolynomialSyntaxError(f"cannot parse polynomial {text!r} near position {pos}")
        sign, digits, xpart, power = m.groups()
        if not digits and not xpart:
            raise PolynomialSyntaxError(f"cannot parse polynomial {text!r} near position {pos}")
        c = int(digits) if digits else 1
        if sign == "-":
            c = -c
        e = (int(power) if power else 1) if xpart else 0
        coeffs[e] = coeffs.get(e, 0) + c
        pos = m.end()
    deg = max(coeffs)
    return [coeffs.get(i, 0) for i in range(deg + 1)]


@dataclass(frozen=True)
class MinimalPolynomial:
    """Monic integer polynomial, coefficients listed constant first."""

    coefficients: tuple[int, ...]

    def __post_init__(self):
        coeffs = tuple(int(c) for c in self.coefficients)
        while len(coeffs) > 1 and coeffs[-1] == 0:
            coeffs = coeffs[:-1]
        object.__setattr__(self, "coefficients", coeffs)
        if len(coeffs) < 2:
            raise NotMonic("polynomial must have degree at least 1")
        if coeffs[-1] != 1:
            raise NotMonic(f"leading coefficient is {coeffs[-1]}, expected 1")

    @classmethod
    def parse(cls, text: str) -> "MinimalPolynomial":
        return cls(tuple(parse_polynomial(text)))

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def __call__(self, x):
        acc = 0
        for c in reversed(self.coefficients):
            acc = acc * x + c
        return acc

    def __str__(self) -> str:
        parts = []
        for e in range(self.degree, -1, -1):
            c = self.coefficients[e]
            if c == 0:
                continue
            sign = "-" if c < 0 else "+"
            mag = abs(c)
            if e == 0:
                body = str(mag)
            else:
                body = ("" if mag == 1 else str(mag)) + ("x" if e == 1 else f"x^{e}")
            parts.append((sign, body))
        first_sign, first_body = parts[0]
        out = ("-" if first_sign == "-" else "") + first_body
        for sign, body in parts[1:]:
            out += sign + body
        return out


# ---------------------------------------------------------------------------
# Sturm sequences and the isolating interval


def _sturm_chain(p: Sequence[int]) -> list[list[Fraction]]:
    chain = [_trim([Fraction(c) for c in p]), _derivative(p)]
    while chain[-1] and len(chain[-1]) > 1:
        _, r = _poly_divmod(chain[-2], chain[-1])
        if not r:
            break
        chain.append([-c for c in r])
    return chain


def _sign_changes(values: Iterable[int]) -> int:
    signs = [s for s in values if s != 0]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def _chain_at(chain, x: Fraction) -> int:
    vals = []
    for q in chain:
        acc = Fraction(0)
        for c in reversed(q):
            acc = acc * x + c
        vals.append(_sign(acc))
    return _sign_changes(vals)


def count_roots(poly: Sequence[int], lo: Rational, hi: Rational) -> int:
    """Number of distinct real roots of ``poly`` in the half-open interval (lo, hi]."""
    chain = _sturm_chain(poly)
    return _chain_at(chain, Fraction(lo)) - _chain_at(chain, Fraction(hi))


@dataclass(frozen=True)
class IsolatingInterval:
    """Open interval (lo, hi) containing exactly one root, which exceeds 1."""

    lo: Fraction
    hi: Fraction

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo


class Field:
    """The number field Q(beta) for the unique real root beta > 1 of ``poly``.

    Use :func:`make_field` to build one.  A field never changes after
    construction apart from a private, append-only cache of refinements of
    the isolating interval.
    """

    def __init__(self, poly: MinimalPolynomial):
        self.poly = poly
        self.degree = poly.degree
        coeffs = list(poly.coefficients)

        if len(_poly_gcd(coeffs, _derivative(coeffs))) > 1:
            raise NotSquarefree(f"{poly} has a repeated factor")

        # Remove a root at 1 (if any) so Sturm counting and bisection can use 1 as an endpoint.
        iso = coeffs
        if poly(1) == 0:
            q, _ = _poly_divmod(coeffs, [-1, 1])
            iso = [int(c) for c in q]
        self._iso = iso
        bound = 1 + max(abs(c) for c in coeffs[:-1])
        n_above = count_roots(iso, 1, bound)
        if n_above == 0:
            raise NoRootAboveOne(f"{poly} has no real root greater than 1")
        if n_above > 1:
            raise MultipleRootsAboveOne(f"{poly} has {n_above} real roots greater than 1")

        self._iso_sign_hi = _sign(_int_eval_scaled(iso, bound, 0))
        # integer bracket A < beta < A+1
        a = 1
        while True:
            if _int_eval_scaled(iso, a + 1, 0) == 0:
                if self.degree == 1:
                    break
                raise NotInvertible(f"{poly} has the rational root {a + 1} and is reducible")
            if _sign(_int_eval_scaled(iso, a + 1, 0)) == self._iso_sign_hi:
                break
            a += 1
        self._exact_root = Fraction(a + 1) if self.degree == 1 else None
        # cache of (shift, numerator): beta in (num/2^shift, (num+1)/2^shift)
        self._lock = threading.Lock()
        self._cache: list[tuple[int, int]] = [(0, a)]

        d = self.degree
        # beta^k for k in [d, 2d-2] in the power basis (integer rows, monic reduction)
        self._reduce: list[list[int]] = []
        row = [0] * d
        row[d - 1] = 1  # beta^(d-1)
        for _k in range(d, 2 * d - 1):
            top = row[d - 1]
            row = [0] + row[:-1]
            for i in range(d):
                row[i] -= top * coeffs[i]
            self._reduce.append(row[:])

        self.zero = FieldElement(self, (0,) * d, 1)
        self.one = self.from_rational(1)
        if d == 1:
            self.beta = self.from_rational(self._exact_root)
        else:
            self.beta = FieldElement(self, tuple(1 if i == 1 else 0 for i in range(d)), 1)

    def __repr__(self) -> str:
        return f"Field({self.poly})"

    # -- interval machinery -------------------------------------------------
    def _bracket(self, shift: int) -> tuple[int, int]:
        """Return (shift', num) with shift' >= shift and beta in (num, num+1)/2^shift'."""
        with self._lock:
            for s, num in reversed(self._cache):
                if s >= shift:
                    return s, num
            s, num = self._cache[-1]
            iso = self._iso
            while s < shift:
                mid = 2 * num + 1
                val = _int_eval_scaled(iso, mid, s + 1)
                if val == 0:
                    raise NotInvertible(f"{self.poly} has a rational root and is reducible")
                s += 1
                num = mid if _sign(val) != self._iso_sign_hi else 2 * num
                # keep checkpoints sparse
                if s % 16 == 0 or s == shift:
                    self._cache.append((s, num))
            return s, num

    def interval(self, bits: int = 32) -> IsolatingInterval:
        """An isolating interval for beta of width at most 2^-bits."""
        if self._exact_root is not None:
            r = self._exact_root
            return IsolatingInterval(r - Fraction(1, 2 ** (bits + 1)), r + Fraction(1, 2 ** (bits + 1)))
        s, num = self._bracket(bits)
        return IsolatingInterval(Fraction(num, 1 << s), Fraction(num + 1, 1 << s))

    def _enclose(self, nums: Sequence[int], shift: int) -> tuple[int, int, int]:
        """Integers (lo, hi, s) with lo/2^(s(d-1)) <= sum nums_j beta^j <= hi/2^(s(d-1))."""
        s, a = self._bracket(shift)
        d = self.degree
        b = a + 1
        lo = hi = 0
        pa = pb = 1
        for j in range(d):
            c = nums[j]
            if c:
                scale = 1 << (s * (d - 1 - j))
                if c > 0:
                    lo += c * pa * scale
                    hi += c * pb * scale
                else:
                    lo += c * pb * scale
                    hi += c * pa * scale
            pa *= a
            pb *= b
        return lo, hi, s

    # -- constructors -------------------------------------------------------
    def from_rational(self, q: Rational) -> "FieldElement":
        q = Fraction(q)
        return FieldElement(self, (q.numerator,) + (0,) * (self.degree - 1), q.denominator)

    def element(self, coords: Sequence[Rational]) -> "FieldElement":
        """Element with the given power-basis coordinates (shorter lists are zero padded)."""
        coords = [Fraction(c) for c in coords]
        if len(coords) > self.degree:
            raise ValueError(f"expected at most {self.degree} coordinates")
        coords += [Fraction(0)] * (self.degree - len(coords))
        den = 1
        for c in coords:
            den = den * c.denominator // gcd(den, c.denominator)
        return FieldElement(self, tuple(int(c * den) for c in coords), den)

    def coerce(self, x) -> "FieldElement":
        if isinstance(x, FieldElement):
            if x.field is not self:
                raise ValueError("elements belong to different fields")
            return x
        if isinstance(x, (int, Fraction)):
            return self.from_rational(x)
        raise TypeError(f"cannot coerce {type(x).__name__} into {self}")


def make_field(poly: MinimalPolynomial | Sequence[int] | str) -> Field:
    """Validate ``poly`` and return the field context of its root above 1."""
    if isinstance(poly, str):
        poly = MinimalPolynomial.parse(poly)
    elif not isinstance(poly, MinimalPolynomial):
        poly = MinimalPolynomial(tuple(poly))
    return Field(poly)


class FieldElement:
    """An exact element of Q(beta); immutable and hashable."""

    __slots__ = ("field", "nums", "den")

    def __init__(self, field: Field, nums: Sequence[int], den: int = 1):
        if den == 0:
            raise DivisionByZero("zero denominator")
        if den < 0:
            nums = [-n for n in nums]
            den = -den
        g = den
        for n in nums:
            g = gcd(g, n)
            if g == 1:
                break
        if g > 1:
            nums = [n // g for n in nums]
            den //= g
        self.field = field
        self.nums = tuple(nums)
        self.den = den

    # -- views ----------------------------------------------------------------
    @property
    def coords(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(n, self.den) for n in self.nums)

    def is_zero(self) -> bool:
        return not any(self.nums)

    def is_rational(self) -> bool:
        return not any(self.nums[1:])

    def as_rational(self) -> Fraction:
        if not self.is_rational():
            raise ValueError("element is irrational")
        return Fraction(self.nums[0], self.den)

    def __repr__(self) -> str:
        return f"FieldElement({', '.join(str(c) for c in self.coords)})"

    def __hash__(self):
        if self.is_rational():
            return hash(Fraction(self.nums[0], self.den))
        return hash((self.nums, self.den))

    def __eq__(self, other):
        if isinstance(other, FieldElement):
            return other.field is self.field and self.nums == other.nums and self.den == other.den
        if isinstance(other, (int, Fraction)):
            return self.is_rational() and Fraction(self.nums[0], self.den) == other
        return NotImplemented

    # -- arithmetic -----------------------------------------------------------
    def _other(self, other) -> "FieldElement | None":
        if isinstance(other, FieldElement):
            if other.field is not self.field:
                raise ValueError("elements belong to different fields")
            return other
        if isinstance(other, (int, Fraction)):
            return self.field.from_rational(other)
        return None

    def __add__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        if o.den == self.den:
            return FieldElement(self.field, [a + b for a, b in zip(self.nums, o.nums)], self.den)
        return FieldElement(
            self.field, [a * o.den + b * self.den for a, b in zip(self.nums, o.nums)], self.den * o.den
        )

    __radd__ = __add__

    def __neg__(self):
        return FieldElement(self.field, [-a for a in self.nums], self.den)

    def __sub__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            q = Fraction(other)
            return FieldElement(self.field, [a * q.numerator for a in self.nums], self.den * q.denominator)
        o = self._other(other)
        if o is None:
            return NotImplemented
        d = self.field.degree
        prod = [0] * (2 * d - 1)
        for i, a in enumerate(self.nums):
            if a:
                for j, b in enumerate(o.nums):
                    if b:
                        prod[i + j] += a * b
        out = prod[:d]
        for k, row in enumerate(self.field._reduce):
            c = prod[d + k]
            if c:
                for i in range(d):
                    out[i] += c * row[i]
        return FieldElement(self.field, out, self.den * o.den)

    __rmul__ = __mul__

    def inverse(self) -> "FieldElement":
        if self.is_zero():
            raise DivisionByZero("division by zero in Q(beta)")
        if self.is_rational():
            return FieldElement(self.field, (self.den,) + (0,) * (self.field.degree - 1), self.nums[0])
        # extended Euclid: find u with u * x = 1 mod poly
        p = [Fraction(c) for c in self.field.poly.coefficients]
        x = _trim([Fraction(n) for n in self.nums])
        r0, r1 = p, x
        s0, s1 = [], [Fraction(1)]
        while len(r1) > 1:
            q, r = _poly_divmod(r0, r1)
            r0, r1 = r1, r
            s0, s1 = s1, _poly_sub(s0, _poly_mul(q, s1))
            if not r1:
                raise NotInvertible(f"{self!r} is a zero divisor: {self.field.poly} is reducible")
        c = r1[0]
        u = [a / c for a in s1]
        _, u = _poly_divmod(u, p)
        return self.field.element(u) * self.den

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            if other == 0:
                raise DivisionByZero("division by zero")
            q = Fraction(other)
            return FieldElement(self.field, [a * q.denominator for a in self.nums], self.den * q.numerator)
        o = self._other(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        return o * self.inverse()

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        result = self.field.one
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    # -- order ----------------------------------------------------------------
    def sign(self) -> int:
        """Sign of the real number, decided by refining the isolating interval."""
        if self.is_zero():
            return 0
        if self.is_rational():
            return _sign(self.nums[0])
        shift = 32
        checked = False
        while True:
            lo, hi, _ = self.field._enclose(self.nums, shift)
            if lo > 0:
                return 1
            if hi < 0:
                return -1
            shift *= 2
            if shift >= 1024 and not checked:
                # a true nonzero value separates eventually; a zero divisor never does
                g = _poly_gcd(list(self.field.poly.coefficients), list(self.nums))
                if len(g) > 1:
                    raise NotInvertible(f"{self!r} is a zero divisor: {self.field.poly} is reducible")
                checked = True

    def _cmp(self, other) -> int:
        o = self._other(other)
        if o is None:
            raise TypeError("unsupported comparison")
        return (self - o).sign()

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __abs__(self):
        return -self if self.sign() < 0 else self

    def approx(self, bits: int) -> Fraction:
        """A rational within 2^-bits of the element."""
        if self.is_rational():
            return Fraction(self.nums[0], self.den)
        bits = max(bits, 0)
        d = self.field.degree
        # width of the enclosure is roughly 2^-s * sum |c_j| j beta^(j-1) / den
        weight = sum(abs(c) * j * (1 << (2 * j)) for j, c in enumerate(self.nums))
        shift = max(bits + 1 + weight.bit_length() - self.den.bit_length(), 8)
        while True:
            lo, hi, s = self.field._enclose(self.nums, shift)
            scale = self.den << (s * (d - 1))
            if Fraction(hi - lo, scale) <= Fraction(2, 1 << bits):
                return Fraction(lo + hi, 2 * scale)
            shift += max(8, bits // 4)

    def __float__(self) -> float:
        return float(self.approx(60))

    def floor(self) -> int:
        guess = self.approx(2)
        n = guess.numerator // guess.denominator
        while (self - n).sign() < 0:
            n -= 1
        while (self - (n + 1)).sign() >= 0:
            n += 1
        return n


# ---------------------------------------------------------------------------
# helpers working on rationals and field elements alike


def sign(x) -> int:
    """Sign of an int, Fraction or FieldElement."""
    if isinstance(x, FieldElement):
        return x.sign()
    return _sign(x)


def floor(x) -> int:
    if isinstance(x, FieldElement):
        return x.floor()
    q = Fraction(x)
    return q.numerator // q.denominator


def approx(x, bits: int) -> Fraction:
    """A rational within 2^-bits of ``x``."""
    if isinstance(x, FieldElement):
        return x.approx(bits)
    return Fraction(x)


def to_float(x) -> float:
    return float(x)


def is_pisot(poly: MinimalPolynomial | Sequence[int] | str | Field) -> bool:
    """True when every root of the polynomial except beta lies inside the unit disk.

    The cofactor poly(x)/(x - beta) is formed over Q(beta) by synthetic
    division and tested with the Schur-Cohn reduction; each step needs only
    sign decisions, which are exact.
    """
    field = poly if isinstance(poly, Field) else make_field(poly)
    a = field.poly.coefficients
    d = field.degree
    if d == 1:
        return True
    beta = field.beta
    # cofactor coefficients, constant first
    q = [field.zero] * d
    q[d - 1] = field.one
    for k in range(d - 1, 0, -1):
        q[k - 1] = beta * q[k] + a[k]
    if not (beta * q[0] + a[0]).is_zero():
        raise AssertionError("synthetic division left a remainder")
    c = q
    n = d - 1
    while n > 0:
        a0, an = c[0], c[n]
        if (an * an - a0 * a0).sign() <= 0:
            return False
        c = [an * c[k + 1] - a0 * c[n - k - 1] for k in range(n)]
        n -= 1
    return True


def exact_form(x):
    """JSON-friendly exact form: "p/q" for rationals, a list of coordinates otherwise."""
    if isinstance(x, FieldElement):
        if x.is_rational():
            return str(x.as_rational())
        return [str(c) for c in x.coords]
    return str(Fraction(x))


def render(x, digits: int = 12) -> dict:
    """Decimal and exact rendering used by reports."""
    q = approx(x, 4 * digits + 16)
    return {"decimal": format(float(q), f".{digits}g"), "exact": exact_form(x)}
