"""From a strategy in base beta to a classical binary strategy.

A strategy M fair against the Parry measure defines a measure
mu(sigma) = M(sigma) P(sigma) on cylinders, and hence a distribution function
on [0, 1].  Its binary difference quotients form a strategy fair against the
uniform measure on binary words.  With the savings property the distribution
function is almost Lipschitz, which makes the binary strategy computable to
any requested precision from finitely many cylinder values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .algebraic import approx
from .beta_expansion import BetaBase, approximate_dyadic, as_word, dyadic_value, expand
from .errors import InputError, NoSavingsProperty, NotAdmissible
from .martingales import DfaMartingale, Martingale, SavingsMartingale
from .measures import density_bounds, parry_density, parry_measure, xi_conditional_values
from .shift_automaton import is_admissible


def _upper(x, bits: int = 64) -> Fraction:
    return approx(x, bits) + Fraction(1, 1 << bits)


def _lower(x, bits: int = 64) -> Fraction:
    return approx(x, bits) - Fraction(1, 1 << bits)


def _log2_lower(x, bits: int = 64) -> Fraction:
    """Rational lower bound on log2 x for x > 1."""
    lo = _lower(x, bits)
    # bisection on Fraction exponents would be exact but slow; the float log
    # is shifted down by a generous margin instead
    return Fraction(math.log2(lo)).limit_denominator(1 << 30) - Fraction(1, 1 << 20)


@dataclass(frozen=True)
class LipschitzConstants:
    """Bounds making cdf(x + h) - cdf(x) <= modulus(h) for 0 < h.

    ``linear_rate`` and ``offset`` bound capital as M(sigma) <= linear_rate |sigma| + offset;
    the modulus is 3 k h (linear_rate (1 + log_beta(1/h)) + offset) with k the
    maximum of the Parry density.  ``k_log`` is the constant of the
    natural-log form -k_log h ln h, valid for h <= 1/e.
    """

    k_upper: Fraction
    k_lower: Fraction
    d_min: Fraction
    savings_constant: Fraction
    linear_rate: Fraction
    offset: Fraction
    log2_beta_lower: Fraction
    k_log: Fraction

    def modulus_dyadic(self, v: int) -> Fraction:
        """Modulus at h = 2^-v."""
        h = Fraction(1, 1 << v) if v >= 0 else Fraction(1 << -v)
        return 3 * self.k_upper * h * (self.linear_rate * (1 + max(v, 0) / self.log2_beta_lower) + self.offset)

    def modulus(self, h: float) -> float:
        if h <= 0:
            return 0.0
        logb = max(-math.log2(h), 0.0) / float(self.log2_beta_lower)
        return 3 * float(self.k_upper) * h * (float(self.linear_rate) * (1 + logb) + float(self.offset))

    def to_json(self) -> dict:
        return {k: str(getattr(self, k)) for k in self.__dataclass_fields__}


class InducedMeasure:
    """mu(sigma) = M(sigma) P(sigma) for a strategy M fair against the Parry measure of ``base``."""

    def __init__(self, mart: Martingale, base: BetaBase, savings_constant=None, cache_limit: int = 500_000):
        self.mart = mart
        self.base = base
        self.parry = parry_measure(base)
        if savings_constant is None:
            if isinstance(mart, SavingsMartingale):
                savings_constant = mart.savings_constant
            elif isinstance(mart, DfaMartingale) and not mart.betting:
                savings_constant = 0
        self.savings_constant = savings_constant
        self._cache: dict = {}
        self._cache_limit = cache_limit
        self._root = (base.field.zero, mart.start(), base.field.one, self.parry.predictor())
        self._lipschitz: LipschitzConstants | None = None
        self._dyadic: dict = {}

    @property
    def has_savings(self) -> bool:
        return self.savings_constant is not None

    @property
    def total_mass(self):
        return self.mart.capital(self.mart.start())

    # -- exact cylinder values ----------------------------------------------
    def _node(self, word: tuple):
        """(left mass, strategy state, P(word), predictor) after reading ``word``."""
        node = self._cache.get(word)
        if node is not None:
            return node
        j = len(word)
        while j > 0 and word[:j] not in self._cache:
            j -= 1
        node = self._cache[word[:j]] if j else self._root
        left, st, p, pr = node
        for t in range(j, len(word)):
            d = word[t]
            probs = pr.probs()
            if d not in probs:
                raise NotAdmissible(f"{word!r} is not admissible")
            for b, pb in probs.items():
                if b < d:
                    left = left + self.mart.capital(self.mart.advance(st, b)) * p * pb
            st = self.mart.advance(st, d)
            p = p * probs[d]
            pr = pr.push(d)
            node = (left, st, p, pr)
            if len(self._cache) < self._cache_limit:
                self._cache[word[: t + 1]] = node
        return node

    def mu(self, sigma):
        w = self.base.check_word(sigma)
        if not is_admissible(self.base, w):
            raise NotAdmissible(f"{w!r} is not admissible")
        _, st, p, _ = self._node(w)
        return self.mart.capital(st) * p

    def cdf_beta_adic(self, sigma):
        """mu of [0, <sigma>): the mass of all cylinders of prefixes of sigma branching to a smaller digit."""
        w = self.base.check_word(sigma)
        if not is_admissible(self.base, w):
            raise NotAdmissible(f"{w!r} is not admissible")
        return self._node(w)[0]

    def cdf_enclosure(self, x, digits: int = 48):
        """Exact (lo, hi) with lo <= cdf(x) <= hi, from the first ``digits`` digits of x."""
        x = self.base.field.coerce(x)
        if x.sign() < 0:
            return self.base.field.zero, self.base.field.zero
        if (x - 1).sign() >= 0:
            return self.total_mass, self.total_mass
        w = expand(self.base, x, digits).digits
        lo = self.cdf_beta_adic(w)
        return lo, lo + self.mu(w)

    # -- almost-Lipschitz constants -------------------------------------------
    def lipschitz(self) -> LipschitzConstants:
        if not self.has_savings:
            raise NoSavingsProperty("the strategy is not known to have the savings property")
        if self._lipschitz is None:
            lo, hi = density_bounds(self.base)
            k_up, k_lo = _upper(hi), _lower(lo)
            d_min = _lower(xi_conditional_values(self.base)[0])
            a = k_up / (k_lo * d_min)
            cs = Fraction(approx(self.savings_constant, 64)) + (Fraction(1, 1 << 64) if self.savings_constant else 0)
            c = cs * a
            m0 = _upper(self.total_mass)
            l2 = _log2_lower(self.base.beta)
            ln_beta = l2 * Fraction(693147, 1000000)  # ln 2 > 0.693147
            d = 3 * k_up
            k_log = d * (c + m0 + c / ln_beta)
            self._lipschitz = LipschitzConstants(k_up, k_lo, d_min, cs, c, m0, l2, k_log)
        return self._lipschitz

    def dyadic_precision(self, i: int) -> int:
        """Least v >= i+2 with modulus(2^-v) <= 2^-(i+1)."""
        lc = self.lipschitz()
        target = Fraction(1, 1 << (i + 1))
        v = i + 2
        while lc.modulus_dyadic(v) > target:
            v += 1
        return v

    def cdf_dyadic(self, p, i: int) -> tuple[Fraction, Fraction]:
        """(value, radius) with |value - cdf(p)| <= radius <= 2^-i for a dyadic p in [0, 1]."""
        if isinstance(p, (str, tuple, list)):
            bits = as_word(p)
            p = dyadic_value(bits)
        else:
            p = Fraction(p)
            if p.denominator & (p.denominator - 1):
                raise InputError(f"{p} is not a dyadic rational")
            bits = None
        key = (p, i)
        hit = self._dyadic.get(key)
        if hit is not None:
            return hit
        if p <= 0:
            out = (Fraction(0), Fraction(0))
        elif p >= 1:
            out = (Fraction(approx(self.total_mass, i + 2)), Fraction(1, 1 << (i + 2)))
        else:
            if bits is None:
                nbits = p.denominator.bit_length() - 1
                bits = tuple(int(c) for c in format(p.numerator, f"0{nbits}b"))
            v = self.dyadic_precision(i)
            tau = approximate_dyadic(self.base, bits, v)
            val = self.cdf_beta_adic(tau)
            radius = Fraction(1, 1 << (i + 2)) + self.lipschitz().modulus_dyadic(v)
            out = (Fraction(approx(val, i + 2)), radius)
        self._dyadic[key] = out
        return out


class BinaryMartingale:
    """N(tau) = 2^|tau| (cdf(<tau>_2 + 2^-|tau|) - cdf(<tau>_2)), evaluated to a requested precision."""

    def __init__(self, induced: InducedMeasure):
        self.induced = induced

    def __call__(self, tau, i: int) -> tuple[Fraction, Fraction]:
        """(value, radius) with radius <= 2^-i."""
        bits = as_word(tau)
        n = len(bits)
        if n == 0:
            m0 = self.induced.total_mass
            return Fraction(approx(m0, i + 1)), Fraction(1, 1 << (i + 1))
        left = dyadic_value(bits)
        right = left + Fraction(1, 1 << n)
        prec = i + n + 2
        a, ra = self.induced.cdf_dyadic(left, prec)
        b, rb = self.induced.cdf_dyadic(right, prec)
        scale = 1 << n
        return (b - a) * scale, (ra + rb) * scale


def binary_martingale(induced: InducedMeasure, tau, i: int) -> tuple[Fraction, Fraction]:
    return BinaryMartingale(induced)(tau, i)


def density_cdf(base: BetaBase, x):
    """Exact Parry distribution function at x, integrating the invariant density."""
    return parry_density(base).cdf(base.field.coerce(x))


def difference_quotients(induced: InducedMeasure, z, steps: Sequence[int], digits: int = 64) -> list[dict]:
    """Enclosures of (cdf(z + h) - cdf(z)) / h for h = +-beta^-j.

    Each entry carries the lower bound of the quotient, which is what a
    growth claim needs.
    """
    base = induced.base
    z = base.field.coerce(z)
    z_lo, z_hi = induced.cdf_enclosure(z, digits)
    out = []
    for j in steps:
        h = base.inv_power(j)
        for s in (1, -1):
            y = z + h * s
            if y.sign() < 0 or (y - 1).sign() > 0:
                continue
            y_lo, y_hi = induced.cdf_enclosure(y, digits)
            if s > 0:
                lower = (y_lo - z_hi) / h
                upper = (y_hi - z_lo) / h
            else:
                lower = (z_lo - y_hi) / h
                upper = (z_hi - y_lo) / h
            out.append({"j": j, "side": "+" if s > 0 else "-", "lower": float(approx(lower, 60)),
                        "upper": float(approx(upper, 60))})
    return out
