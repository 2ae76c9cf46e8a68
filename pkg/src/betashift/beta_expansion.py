"""Greedy beta-expansions with exact remainders.

The central object is :class:`BetaBase`, a Pisot base together with the
expansion of 1 that governs admissibility.  Digit words are tuples of ints;
most functions also accept strings of ASCII digits.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Iterator, Sequence

from .algebraic import Field, FieldElement, MinimalPolynomial, is_pisot, make_field
from .errors import BadDigit, InvariantViolation, NotPisot, OutOfRange, PeriodNotFound

Word = tuple


def as_word(w) -> tuple[int, ...]:
    """Convert a digit string or sequence into a tuple of ints."""
    if isinstance(w, str):
        if not w.isdigit() and w != "":
            raise BadDigit(f"not a digit string: {w!r}")
        return tuple(int(c) for c in w)
    return tuple(int(c) for c in w)


def word_str(w: Iterable[int]) -> str:
    return "".join(str(d) for d in w)


def _lex_le_eventually_periodic(a: Sequence[int], b: Sequence[int]) -> bool:
    for x, y in zip(a, b):
        if x != y:
            return x < y
    return True


@dataclass(frozen=True, eq=False)
class BetaBase:
    """A Pisot base.

    ``pre`` and ``period`` describe the expansion of 1 used for admissibility,
    d_1 d_2 ... = pre (period)^inf.  When the greedy expansion of beta is
    finite it is kept in ``raw_expansion`` and the stored sequence is the
    periodic variant.
    """

    field: Field
    alphabet_size: int
    pre: tuple[int, ...]
    period: tuple[int, ...]
    raw_expansion: tuple[int, ...] | None
    is_integer: bool

    @property
    def poly(self) -> MinimalPolynomial:
        return self.field.poly

    @property
    def beta(self) -> FieldElement:
        return self.field.beta

    @property
    def m(self) -> int:
        return len(self.pre)

    @property
    def n(self) -> int:
        return len(self.period)

    @property
    def alphabet(self) -> tuple[int, ...]:
        return tuple(range(self.alphabet_size))

    def __repr__(self) -> str:
        return f"BetaBase({self.poly}, s={word_str(self.pre)}({word_str(self.period)}))"

    def s_digit(self, i: int) -> int:
        """Digit d_(i+1) of the expansion of 1 (0-based index)."""
        if i < self.m:
            return self.pre[i]
        return self.period[(i - self.m) % self.n]

    def s_prefix(self, length: int) -> tuple[int, ...]:
        return tuple(self.s_digit(i) for i in range(length))

    def s_shift(self, k: int, length: int) -> tuple[int, ...]:
        """First ``length`` digits of the k-fold shift of the expansion of 1."""
        return tuple(self.s_digit(k + i) for i in range(length))

    @cached_property
    def beta_inverse(self) -> FieldElement:
        return self.field.beta.inverse()

    @cached_property
    def _inv_powers(self) -> list[FieldElement]:
        return [self.field.one]

    def inv_power(self, k: int) -> FieldElement:
        """beta^-k, cached."""
        powers = self._inv_powers
        while len(powers) <= k:
            powers.append(powers[-1] * self.beta_inverse)
        return powers[k]

    @cached_property
    def dfa(self):
        from .shift_automaton import beta_dfa

        return beta_dfa(self)

    @cached_property
    def graph(self):
        from .shift_automaton import presentation

        return presentation(self)

    def check_word(self, w) -> tuple[int, ...]:
        w = as_word(w)
        for d in w:
            if not 0 <= d < self.alphabet_size:
                raise BadDigit(f"digit {d} outside 0..{self.alphabet_size - 1}")
        return w


def make_base(
    poly: MinimalPolynomial | Sequence[int] | str,
    require_pisot: bool = True,
    max_iter: int = 10**6,
) -> BetaBase:
    """Build a base from its minimal polynomial.

    The greedy expansion of beta is computed with exact remainders.  A
    remainder of 0 ends the expansion; a repeated remainder closes a cycle.
    With ``require_pisot=False`` non-Pisot polynomials are allowed and
    ``max_iter`` bounds the search.
    """
    field = make_field(poly)
    if require_pisot and not is_pisot(field):
        raise NotPisot(f"{field.poly} is not a Pisot polynomial")
    beta = field.beta
    is_int = field.degree == 1
    s0 = beta.floor()
    alphabet_size = s0 if is_int else s0 + 1

    digits = [s0]
    r = beta - s0
    seen: dict[FieldElement, int] = {r: 0}
    raw = None
    pre: tuple[int, ...]
    period: tuple[int, ...]
    while True:
        if r.is_zero():
            raw = tuple(digits)
            pre = ()
            period = raw[:-1] + (raw[-1] - 1,)
            break
        if len(digits) > max_iter:
            raise PeriodNotFound(f"no period within {max_iter} digits for {field.poly}")
        x = beta * r
        s = x.floor()
        r = x - s
        digits.append(s)
        if r in seen:
            # the digit after remainder r_i is determined by r_i alone
            i = seen[r]
            pre = tuple(digits[: i + 1])
            period = tuple(digits[i + 1 :])
            break
        seen[r] = len(digits) - 1

    base = BetaBase(field, alphabet_size, pre, period, raw, is_int)
    _check_base(base)
    return base


def _check_base(base: BetaBase) -> None:
    span = base.m + base.n
    full = base.s_prefix(2 * span)
    if any(not 0 <= d < base.alphabet_size for d in full):
        raise InvariantViolation("expansion of 1 uses a digit outside the alphabet")
    for k in range(1, span):
        if not _lex_le_eventually_periodic(base.s_shift(k, span), full[:span]):
            raise InvariantViolation(f"shift {k} of the expansion of 1 exceeds it")
    # the stored sequence really expands 1
    if value_of_expansion(base, base.pre, base.period) != 1:
        raise InvariantViolation("stored expansion does not evaluate to 1")


def value_of_expansion(base: BetaBase, pre: Sequence[int], period: Sequence[int]) -> FieldElement:
    """Exact value of the infinite word pre (period)^inf."""
    head = value(base, pre)
    if not period:
        return head
    cyc = value(base, period)
    n = len(period)
    return head + base.inv_power(len(pre)) * cyc / (1 - base.inv_power(n))


def value(base: BetaBase, sigma) -> FieldElement:
    """Exact value sum_k sigma(k-1) beta^-k of a digit word."""
    w = base.check_word(sigma)
    v = base.field.zero
    binv = base.beta_inverse
    for d in reversed(w):
        v = (v + d) * binv
    return v


@dataclass(frozen=True)
class Expansion:
    digits: tuple[int, ...]
    cycle: tuple[tuple[int, ...], tuple[int, ...]] | None

    def __str__(self) -> str:
        return word_str(self.digits)


class DigitStream:
    """Pull-based greedy expansion of a number in [0, 1).

    Remainders are remembered until one repeats; from then on digits come from
    the detected cycle and the stream holds only a cursor.
    """

    def __init__(self, base: BetaBase, x, track_limit: int = 10**5):
        x = base.field.coerce(x)
        if x.sign() < 0 or (x - 1).sign() >= 0:
            raise OutOfRange("expansion needs 0 <= x < 1")
        self.base = base
        self._r = x
        self._digits: list[int] = []
        self._seen: dict[FieldElement, int] | None = {x: 0}
        self._track_limit = track_limit
        self.cycle: tuple[tuple[int, ...], tuple[int, ...]] | None = None
        self._cycle_start = 0
        self._pos = 0

    def __iter__(self) -> Iterator[int]:
        return self

    def __next__(self) -> int:
        i = self._pos
        self._pos += 1
        if i < len(self._digits):
            return self._digits[i]
        if self.cycle is not None:
            pre, per = self.cycle
            return per[(i - len(pre)) % len(per)]
        return self._advance()

    def _advance(self) -> int:
        y = self.base.beta * self._r
        d = y.floor()
        self._r = y - d
        self._digits.append(d)
        if self._seen is not None:
            k = len(self._digits)
            j = self._seen.get(self._r)
            if j is not None:
                self.cycle = (tuple(self._digits[:j]), tuple(self._digits[j:]))
                self._seen = None
            elif k < self._track_limit:
                self._seen[self._r] = k
            else:
                self._seen = None
        return d

    def take(self, count: int) -> tuple[int, ...]:
        return tuple(next(self) for _ in range(count))

    def detect_cycle(self, limit: int = 10**5):
        """Advance until the cycle is known (or ``limit`` digits); return it."""
        while self.cycle is None and self._seen is not None and len(self._digits) < limit:
            self._advance()
        return self.cycle


def expand(base: BetaBase, x, count: int) -> Expansion:
    """First ``count`` digits of the greedy expansion of x, plus the cycle if found."""
    stream = DigitStream(base, x)
    digits = stream.take(count)
    if stream.cycle is None:
        stream.detect_cycle(limit=max(4 * count, 1000))
    return Expansion(digits, stream.cycle)


def block_view(s, k: int):
    """Non-overlapping consecutive k-blocks of s; a trailing partial block is dropped."""
    if k < 1:
        raise ValueError("block length must be positive")
    if isinstance(s, (str, tuple, list)):
        return [s[i : i + k] for i in range(0, len(s) - k + 1, k)]
    return _block_iter(iter(s), k)


def _block_iter(it: Iterator, k: int):
    while True:
        block = []
        for _ in range(k):
            try:
                block.append(next(it))
            except StopIteration:
                return
        yield tuple(block)


def dyadic_value(bits) -> Fraction:
    """Value sum_k bits(k-1) 2^-k of a binary word."""
    w = as_word(bits)
    v = Fraction(0)
    for d in reversed(w):
        if d not in (0, 1):
            raise BadDigit(f"binary digit expected, got {d}")
        v = (v + d) / 2
    return v


def approximate_dyadic(base: BetaBase, sigma, i: int) -> tuple[int, ...]:
    """Admissible word whose value is within 2^-i of the dyadic rational <sigma>_2.

    Each step appends the greatest admissible digit whose approximate value
    stays at or below the target, except that the next digit up is taken
    when it overshoots by less than 2^-(i+1).  Values are compared through
    running rational approximations whose total error stays below 2^-(i+2).
    """
    r = dyadic_value(sigma)
    dfa = base.dfa
    half = Fraction(1, 2 ** (i + 1))
    # at most 4i+8 digits, each below the alphabet size, each term off by <= 2^-bits
    budget = (4 * i + 8) * base.alphabet_size
    bits = i + 3 + budget.bit_length()
    tau: list[int] = []
    est = Fraction(0)
    state = dfa.initial
    while abs(est - r) > half:
        step = _inv_power_approx(base, len(tau) + 1, bits)
        allowed = dfa.allowed(state)
        top = allowed[-1]
        below = [b for b in allowed if est + step * b <= r]
        b = below[-1] if below else 0
        if b != top and est + step * (b + 1) - half < r:
            b = b + 1
        tau.append(b)
        est = est + step * b
        state = dfa.step(state, b)
    return tuple(tau)


def _inv_power_approx(base: BetaBase, k: int, bits: int) -> Fraction:
    cache = base.__dict__.setdefault("_inv_power_approx", {})
    key = (k, bits)
    v = cache.get(key)
    if v is None:
        v = base.inv_power(k).approx(bits)
        cache[key] = v
    return v
