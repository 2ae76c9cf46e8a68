"""Measures on digit sequences.

Two families are provided.  :class:`MarkovMeasure` is a k-step Markov
measure with exact (rational or field-valued) parameters.  :class:`ParryMeasure`
is the measure of maximal entropy on a beta-shift, realised as the push-forward
of the max-entropy chain on the edges of the shift's presentation.

The Lebesgue length of a beta-adic cylinder is given by :func:`xi` (closed
form) and :func:`xi_oracle` (successor-word difference); the Parry measure of a
cylinder by :func:`parry_cylinder` (integrating the invariant density) and
:func:`parry_via_edges` (summing edge paths).
"""

from __future__ import annotations

import bisect
import math
import weakref
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Hashable, Iterable, Mapping, Sequence

import networkx as nx
import numpy as np

from .algebraic import FieldElement, approx, sign
from .beta_expansion import BetaBase, as_word, value, value_of_expansion, word_str
from .errors import (
    InvariantViolation,
    NotAdmissible,
    NotErgodicClass,
    NotIrreducible,
    NotSupported,
    ZeroConditional,
)
from .exact_linalg import nullspace, solve_stationary
from .shift_automaton import Boundary, Dfa, ergodic_classes, in_l, is_admissible, n_sigma, next_word


def _log2(v) -> float:
    if isinstance(v, FieldElement):
        q = v.approx(80)
        return math.log2(q.numerator) - math.log2(q.denominator)
    q = Fraction(v)
    return math.log2(q.numerator) - math.log2(q.denominator)


class Measure:
    """Interface: a shift-invariant or plain probability measure on words."""

    alphabet: tuple

    def cylinder(self, word) -> object:
        raise NotImplementedError

    def conditional(self, word, a):
        """P(word a | word)."""
        word = tuple(word)
        c = self.cylinder(word)
        if c == 0:
            raise ZeroConditional(f"conditioning on a null word {word!r}")
        return self.cylinder(word + (a,)) / c

    def predictor(self) -> "Predictor":
        return _GenericPredictor(self, ())


class Predictor:
    """Sequential view of a measure: next-symbol probabilities given the past."""

    def probs(self) -> dict:
        raise NotImplementedError

    def push(self, a) -> "Predictor":
        raise NotImplementedError


class _GenericPredictor(Predictor):
    def __init__(self, measure: Measure, word: tuple):
        self.measure = measure
        self.word = word

    def probs(self) -> dict:
        out = {}
        c = self.measure.cylinder(self.word)
        for a in self.measure.alphabet:
            v = self.measure.cylinder(self.word + (a,))
            if v != 0:
                out[a] = v / c
        return out

    def push(self, a) -> "Predictor":
        return _GenericPredictor(self.measure, self.word + (a,))


# ---------------------------------------------------------------------------
# k-step Markov measures


class MarkovMeasure(Measure):
    """k-step Markov measure.

    ``init`` gives the probability of each length-k block (zero blocks may be
    omitted); ``cond[tau][a]`` is P(tau a | tau) for blocks tau of length k.
    """

    def __init__(
        self,
        alphabet: Sequence,
        order: int,
        init: Mapping[tuple, object],
        cond: Mapping[tuple, Mapping[Hashable, object]],
        name: str = "",
    ):
        if order < 1:
            raise ValueError("order must be at least 1")
        self.alphabet = tuple(alphabet)
        self.order = order
        self.init = {tuple(t): v for t, v in init.items() if v != 0}
        self.cond = {tuple(t): {a: v for a, v in row.items() if v != 0} for t, row in cond.items()}
        self.name = name
        self._prefix: dict[tuple, object] = {}
        self._validate()

    def _validate(self) -> None:
        if sum(self.init.values(), Fraction(0)) != 1:
            raise InvariantViolation("initial distribution does not sum to 1")
        for t in self.init:
            if len(t) != self.order:
                raise InvariantViolation(f"initial block {t!r} has the wrong length")
        todo = list(self.init)
        seen = set(todo)
        while todo:
            t = todo.pop()
            row = self.cond.get(t)
            if row is None:
                raise InvariantViolation(f"missing transition row for block {t!r}")
            if sum(row.values(), Fraction(0)) != 1:
                raise InvariantViolation(f"transition row for {t!r} does not sum to 1")
            for a in row:
                u = t[1:] + (a,)
                if u not in seen:
                    seen.add(u)
                    todo.append(u)
        self.blocks = tuple(sorted(seen, key=lambda t: tuple(map(str, t))))

    def __repr__(self) -> str:
        return f"MarkovMeasure({self.name or 'unnamed'}, order={self.order})"

    # -- constructors -------------------------------------------------------
    @classmethod
    def bernoulli(cls, probs: Mapping[Hashable, object], name: str = "bernoulli") -> "MarkovMeasure":
        probs = {a: v for a, v in probs.items()}
        return cls(tuple(probs), 1, {(a,): v for a, v in probs.items()}, {(a,): probs for a in probs}, name)

    @classmethod
    def uniform(cls, size: int = 2) -> "MarkovMeasure":
        return cls.bernoulli({a: Fraction(1, size) for a in range(size)}, name=f"uniform{size}")

    @classmethod
    def from_matrix(cls, alphabet: Sequence, matrix: Sequence[Sequence], init=None, name: str = "") -> "MarkovMeasure":
        """1-step chain with transition matrix rows indexed like ``alphabet``."""
        alphabet = tuple(alphabet)
        cond = {(a,): {b: matrix[i][j] for j, b in enumerate(alphabet)} for i, a in enumerate(alphabet)}
        if init is None:
            pi = solve_stationary([list(r) for r in matrix], _zero_like(matrix), _one_like(matrix))
            if pi is None:
                raise NotIrreducible("stationary distribution is not unique")
            init = dict(zip(alphabet, pi))
        return cls(alphabet, 1, {(a,): v for a, v in init.items()}, cond, name)

    # -- evaluation -----------------------------------------------------------
    def _prefix_mass(self, w: tuple):
        v = self._prefix.get(w)
        if v is None:
            v = sum((p for t, p in self.init.items() if t[: len(w)] == w), Fraction(0))
            self._prefix[w] = v
        return v

    def cylinder(self, word):
        w = as_word(word) if isinstance(word, str) else tuple(word)
        k = self.order
        if len(w) <= k:
            return self._prefix_mass(w)
        p = self.init.get(w[:k], 0)
        for i in range(k, len(w)):
            if p == 0:
                return p
            p = p * self.cond.get(w[i - k : i], {}).get(w[i], 0)
        return p

    def conditional(self, word, a):
        w = as_word(word) if isinstance(word, str) else tuple(word)
        if len(w) >= self.order:
            if self.cylinder(w) == 0:
                raise ZeroConditional(f"conditioning on a null word {w!r}")
            return self.cond.get(w[len(w) - self.order :], {}).get(a, 0)
        return super().conditional(w, a)

    def predictor(self) -> Predictor:
        return _MarkovPredictor(self, ())

    def block_transition(self, s: tuple, t: tuple):
        """P(s t | s) for blocks of length k."""
        w = tuple(s) + tuple(t)
        p = Fraction(1)
        k = self.order
        for i in range(k, len(w)):
            p = p * self.cond.get(w[i - k : i], {}).get(w[i], 0)
            if p == 0:
                return p
        return p

    def induced_one_step(self) -> "MarkovMeasure":
        """The 1-step chain on length-k blocks read without overlap."""
        blocks = self.blocks
        cond = {}
        for s in blocks:
            cond[(s,)] = {t: self.block_transition(s, t) for t in blocks}
        init = {(s,): self.init.get(s, 0) for s in blocks}
        return MarkovMeasure(blocks, 1, init, cond, name=f"{self.name}^blocks")

    def block_graph(self) -> nx.DiGraph:
        g = nx.DiGraph()
        g.add_nodes_from(self.blocks)
        for s in self.blocks:
            for t in self.blocks:
                if self.block_transition(s, t) != 0:
                    g.add_edge(s, t)
        return g

    def is_irreducible(self) -> bool:
        return nx.is_strongly_connected(self.block_graph())

    def stationary(self) -> dict:
        """Stationary distribution of the block chain, solved exactly."""
        if not self.is_irreducible():
            raise NotIrreducible(f"{self!r} is reducible")
        blocks = self.blocks
        p = [[self.block_transition(s, t) for t in blocks] for s in blocks]
        pi = solve_stationary(p, _zero_like(p), _one_like(p))
        if pi is None:
            raise NotIrreducible("stationary distribution is not unique")
        return dict(zip(blocks, pi))

    def is_invariant(self) -> bool:
        """Shift invariance: P(tau) = sum_a P(a tau) for every block of length k."""
        for t in self.blocks:
            if sum((self.cylinder((a,) + t) for a in self.alphabet), Fraction(0)) != self.cylinder(t):
                return False
        return True

    def support_dfa(self) -> Dfa:
        """Acceptor of the support whose states are the last (at most k) symbols read."""
        k = self.order
        states = {()}
        trans = {}
        todo = [()]
        while todo:
            w = todo.pop()
            for a in self.alphabet:
                if len(w) < k:
                    nxt = w + (a,)
                    ok = self._prefix_mass(nxt) != 0
                else:
                    nxt = w[1:] + (a,)
                    ok = self.cond.get(w, {}).get(a, 0) != 0
                if ok:
                    trans[(w, a)] = nxt
                    if nxt not in states:
                        states.add(nxt)
                        todo.append(nxt)
        order = sorted(states, key=lambda w: (len(w), tuple(map(str, w))))
        return Dfa(tuple(order), self.alphabet, trans, ())

    def float_tables(self):
        init = [(t, float(v)) for t, v in sorted(self.init.items(), key=lambda kv: tuple(map(str, kv[0])))]
        rows = {}
        for t, row in self.cond.items():
            symbols = [a for a in self.alphabet if a in row]
            cum = np.cumsum([float(row[a]) for a in symbols])
            cum[-1] = 1.0
            rows[t] = (symbols, cum.tolist())
        return init, rows


class _MarkovPredictor(Predictor):
    __slots__ = ("m", "ctx")

    def __init__(self, m: MarkovMeasure, ctx: tuple):
        self.m = m
        self.ctx = ctx

    def probs(self) -> dict:
        m = self.m
        if len(self.ctx) >= m.order:
            return dict(m.cond.get(self.ctx, {}))
        c = m._prefix_mass(self.ctx)
        out = {}
        for a in m.alphabet:
            v = m._prefix_mass(self.ctx + (a,)) if len(self.ctx) + 1 <= m.order else 0
            if v != 0:
                out[a] = v / c
        return out

    def push(self, a) -> Predictor:
        ctx = self.ctx + (a,)
        if len(ctx) > self.m.order:
            ctx = ctx[1:]
        return _MarkovPredictor(self.m, ctx)


def _zero_like(matrix):
    for row in matrix:
        for v in row:
            if isinstance(v, FieldElement):
                return v.field.zero
    return Fraction(0)


def _one_like(matrix):
    for row in matrix:
        for v in row:
            if isinstance(v, FieldElement):
                return v.field.one
    return Fraction(1)


def markov_from_measure(measure: Measure, k: int, name: str = "") -> MarkovMeasure:
    """k-step Markov measure agreeing with ``measure`` on words of length <= k+1."""
    alphabet = measure.alphabet
    layer = [()]
    for _ in range(k):
        layer = [w + (a,) for w in layer for a in alphabet if measure.cylinder(w + (a,)) != 0]
    init = {w: measure.cylinder(w) for w in layer}
    cond = {}
    for w in layer:
        c = init[w]
        cond[w] = {a: measure.cylinder(w + (a,)) / c for a in alphabet if measure.cylinder(w + (a,)) != 0}
    return MarkovMeasure(alphabet, k, init, cond, name=name)


def sample(m: MarkovMeasure, length: int, seed: int, start: tuple | None = None) -> tuple:
    """Seeded draw of ``length`` symbols from the chain."""
    if not m.is_irreducible():
        raise NotIrreducible(f"{m!r} is reducible")
    rng = np.random.default_rng(seed)
    init, rows = m.float_tables()
    u = rng.random(length + 1)
    if start is None:
        cum = np.cumsum([p for _, p in init])
        j = min(bisect.bisect_right(cum.tolist(), u[0]), len(init) - 1)
        first = init[j][0]
    else:
        first = tuple(start)
    out = list(first[:length])
    ctx = tuple(first)
    k = m.order
    for i in range(len(out), length):
        symbols, cum = rows[ctx]
        j = bisect.bisect_right(cum, u[i + 1])
        a = symbols[min(j, len(symbols) - 1)]
        out.append(a)
        ctx = ctx[1:] + (a,) if len(ctx) == k else ctx + (a,)
    return tuple(out)


# ---------------------------------------------------------------------------
# Lebesgue length of beta-adic cylinders


def _require(base: BetaBase, sigma) -> tuple[int, ...]:
    w = as_word(sigma)
    if not is_admissible(base, w):
        raise NotAdmissible(f"{word_str(w)} is not admissible")
    return w


class _XiTable:
    """Per-base constants: the length of the top cylinder of each short prefix of the expansion of 1."""

    def __init__(self, base: BetaBase):
        self.top = [1 - value(base, base.s_prefix(j)) for j in range(base.m + base.n + 1)]


_xi_tables: "weakref.WeakKeyDictionary[BetaBase, _XiTable]" = weakref.WeakKeyDictionary()


def _xi_table(base: BetaBase) -> _XiTable:
    t = _xi_tables.get(base)
    if t is None:
        t = _XiTable(base)
        _xi_tables[base] = t
    return t


def xi(base: BetaBase, sigma) -> FieldElement:
    """Length of the interval of reals whose expansion starts with sigma (closed form).

    A word whose last digit is not the largest allowed one has length
    beta^-|sigma|.  Otherwise the word splits at the start of its longest
    suffix that is a prefix of the expansion of 1: the head contributes
    beta^-head, and the tail, after stripping whole periods, is one of the
    finitely many top cylinders.
    """
    w = _require(base, sigma)
    if not w:
        return base.field.one
    if in_l(base, w):
        return base.inv_power(len(w))
    n0 = n_sigma(base, w)
    tail = len(w) - n0
    table = _xi_table(base)
    m, n = base.m, base.n
    if tail <= m:
        top = table.top[tail]
        periods = 0
    else:
        periods, k = divmod(tail - m, n)
        top = table.top[m + k]
    return base.inv_power(n0 + periods * n) * top


def xi_oracle(base: BetaBase, sigma) -> FieldElement:
    """Length of the cylinder as <next(sigma)> - <sigma>, or 1 - <sigma> at the right end."""
    w = _require(base, sigma)
    nxt = next_word(base, w)
    if nxt is Boundary:
        return 1 - value(base, w)
    return value(base, nxt) - value(base, w)


def xi_conditional_values(base: BetaBase) -> list[FieldElement]:
    """All values of xi(sigma b) / xi(sigma) over admissible sigma b.

    The length of a cylinder is beta^-|sigma| times a factor fixed by the
    automaton state before the last digit and the last digit itself, so one
    representative word per (state, digit) pair covers every ratio.
    """
    dfa = base.dfa
    reps = {dfa.initial: ()}
    todo = [dfa.initial]
    while todo:
        q = todo.pop(0)
        for a in base.alphabet:
            q2 = dfa.step(q, a)
            if q2 is not None and q2 not in reps:
                reps[q2] = reps[q] + (a,)
                todo.append(q2)
    out = {}
    words = [()] + [reps[q] + (a,) for q in reps for a in base.alphabet if dfa.step(q, a) is not None]
    for w in words:
        q = dfa.run(w)
        lw = xi(base, w)
        for b in base.alphabet:
            if dfa.step(q, b) is not None:
                r = xi(base, w + (b,)) / lw
                out[r] = r
    return sorted(out, key=lambda v: v.approx(64))


# ---------------------------------------------------------------------------
# the Parry measure


@dataclass(frozen=True)
class ParryDensity:
    """h(x) = C * sum_j weights[j] * 1[0, breakpoints[j])(x), integrating to 1."""

    breakpoints: tuple[FieldElement, ...]
    weights: tuple[FieldElement, ...]
    normalizer: FieldElement
    orbit_words: tuple[tuple[tuple[int, ...], tuple[int, ...]], ...]

    def __call__(self, x) -> FieldElement:
        total = self.normalizer.field.zero
        for t, w in zip(self.breakpoints, self.weights):
            if sign(x - t) < 0:
                total = total + w
        return self.normalizer * total

    def cdf(self, x) -> FieldElement:
        """Integral of h over [0, x] for 0 <= x <= 1."""
        total = self.normalizer.field.zero
        for t, w in zip(self.breakpoints, self.weights):
            total = total + w * (x if sign(x - t) < 0 else t)
        return self.normalizer * total


_densities: "weakref.WeakKeyDictionary[BetaBase, ParryDensity]" = weakref.WeakKeyDictionary()


def parry_density(base: BetaBase) -> ParryDensity:
    d = _densities.get(base)
    if d is not None:
        return d
    m, n = base.m, base.n
    rotations = []
    for j in range(m + n):
        if j < m:
            rotations.append((base.pre[j:], base.period))
        else:
            r = j - m
            rotations.append(((), base.period[r:] + base.period[:r]))
    points = tuple(value_of_expansion(base, pre, per) for pre, per in rotations)
    tail = 1 / (1 - base.inv_power(n))
    weights = tuple(base.inv_power(j) * (tail if j >= m else 1) for j in range(m + n))
    mass = sum((w * t for w, t in zip(weights, points)), base.field.zero)
    d = ParryDensity(points, weights, 1 / mass, tuple(rotations))
    _densities[base] = d
    return d


def _orbit_prefix(base: BetaBase, j: int, length: int) -> tuple[int, ...]:
    return base.s_shift(j, length)


def parry_cylinder(base: BetaBase, sigma) -> FieldElement:
    """Parry measure of a cylinder by integrating the invariant density over its interval.

    The interval lies below an orbit point when sigma is lexicographically
    smaller than that point's expansion prefix and above it when larger; only
    on equality is the overlap computed from the exact values.
    """
    w = _require(base, sigma)
    dens = parry_density(base)
    length = xi(base, w)
    left = value(base, w)
    total = base.field.zero
    for j, (t, weight) in enumerate(zip(dens.breakpoints, dens.weights)):
        pref = _orbit_prefix(base, j, len(w))
        if w < pref:
            overlap = length
        elif w > pref:
            continue
        else:
            room = t - left
            overlap = length if sign(room - length) >= 0 else room
        total = total + weight * overlap
    return dens.normalizer * total


def density_bounds(base: BetaBase) -> tuple[FieldElement, FieldElement]:
    """(min, max) of the normalised Parry density on [0, 1)."""
    dens = parry_density(base)
    pts = sorted(set(dens.breakpoints), key=lambda v: v.approx(64))
    lo_val = hi_val = None
    start = base.field.zero
    for p in pts + [base.field.one]:
        if sign(p - start) > 0:
            # density is constant on [start, p)
            h = dens(start)
            lo_val = h if lo_val is None or sign(h - lo_val) < 0 else lo_val
            hi_val = h if hi_val is None or sign(h - hi_val) > 0 else hi_val
        start = p if sign(p - start) > 0 else start
    return lo_val, hi_val


class ParryMeasure(Measure):
    """Max-entropy measure on the beta-shift, via the presentation's eigenvectors.

    With A the adjacency matrix of the presentation, r and l its right and
    left eigenvectors for beta normalised so that l.r = 1, a word sigma has
    measure beta^-|sigma| * sum over paths of l(origin) r(destination).
    """

    def __init__(self, base: BetaBase):
        self.base = base
        self.alphabet = base.alphabet
        g = base.graph
        self.graph = g
        f = base.field
        beta = f.beta
        a = [[f.from_rational(x) for x in row] for row in g.adjacency()]
        size = len(g.nodes)
        right = nullspace([[a[i][j] - (beta if i == j else 0) for j in range(size)] for i in range(size)], f.zero, f.one)
        left = nullspace([[a[j][i] - (beta if i == j else 0) for j in range(size)] for i in range(size)], f.zero, f.one)
        if len(right) != 1 or len(left) != 1:
            raise InvariantViolation("beta is not a simple eigenvalue of the presentation")
        r, l = right[0], left[0]
        if r[0].sign() < 0:
            r = [-x for x in r]
        if l[0].sign() < 0:
            l = [-x for x in l]
        if any(x.sign() <= 0 for x in r + l):
            raise InvariantViolation("eigenvector for beta is not positive, so beta is not the Perron value")
        scale = sum((x * y for x, y in zip(l, r)), f.zero)
        self.right = tuple(r)
        self.left = tuple(x / scale for x in l)
        self._inv_cache: dict = {}
        self._probs_cache: dict = {}

    def _advance(self, vec: tuple, a) -> tuple:
        g = self.graph
        out = [self.base.field.zero] * len(g.nodes)
        hit = False
        for i, v in enumerate(vec):
            if v == 0:
                continue
            e = g.follow(g.nodes[i], a)
            if e is not None:
                out[e.dest] = out[e.dest] + v
                hit = True
        return tuple(out) if hit else ()

    def _mass(self, vec: tuple):
        return sum((v * r for v, r in zip(vec, self.right)), self.base.field.zero)

    def cylinder(self, word):
        w = self.base.check_word(word)
        vec = self.left
        for a in w:
            vec = self._advance(vec, a)
            if not vec:
                return self.base.field.zero
        return self.base.inv_power(len(w)) * self._mass(vec)

    def predictor(self) -> Predictor:
        return _ParryPredictor(self, self.left)

    def _inverse(self, x):
        inv = self._inv_cache.get(x)
        if inv is None:
            inv = 1 / x
            if len(self._inv_cache) < 4096:
                self._inv_cache[x] = inv
        return inv


class _ParryPredictor(Predictor):
    __slots__ = ("pm", "vec")

    def __init__(self, pm: ParryMeasure, vec: tuple):
        self.pm = pm
        self.vec = vec

    def probs(self) -> dict:
        pm = self.pm
        hit = pm._probs_cache.get(self.vec)
        if hit is not None:
            return dict(hit)
        denom = pm._inverse(pm._mass(self.vec)) * pm.base.beta_inverse
        out = {}
        for a in pm.alphabet:
            nxt = pm._advance(self.vec, a)
            if nxt:
                out[a] = pm._mass(nxt) * denom
        if len(pm._probs_cache) < 4096:
            pm._probs_cache[self.vec] = dict(out)
        return out

    def push(self, a) -> Predictor:
        nxt = self.pm._advance(self.vec, a)
        if not nxt:
            raise NotAdmissible(f"symbol {a} is not admissible here")
        return _ParryPredictor(self.pm, nxt)


_parry_measures: "weakref.WeakKeyDictionary[BetaBase, ParryMeasure]" = weakref.WeakKeyDictionary()


def parry_measure(base: BetaBase) -> ParryMeasure:
    pm = _parry_measures.get(base)
    if pm is None:
        pm = ParryMeasure(base)
        _parry_measures[base] = pm
    return pm


def edge_measure(base: BetaBase) -> MarkovMeasure:
    """Max-entropy 1-step chain on the edges of the presentation, started stationary.

    Successor edge e' of e has probability r(d(e')) / (beta r(d(e))); the
    initial law is the exact stationary vector of that chain.
    """
    pm = parry_measure(base)
    g = pm.graph
    beta = base.beta
    r = pm.right
    edges = [e.index for e in g.edges]
    cond = {}
    for e in g.edges:
        row = {}
        for f in g.out_edges(e.dest):
            row[f.index] = r[f.dest] / (beta * r[e.dest])
        cond[(e.index,)] = row
    matrix = [[cond[(e,)].get(f, base.field.zero) for f in edges] for e in edges]
    pi = solve_stationary(matrix, base.field.zero, base.field.one)
    if pi is None:
        raise NotIrreducible("edge chain has no unique stationary law")
    return MarkovMeasure(edges, 1, {(e,): p for e, p in zip(edges, pi)}, cond, name=f"edges[{base.poly}]")


def parry_via_edges(base: BetaBase, sigma, chain: MarkovMeasure | None = None) -> FieldElement:
    """Parry measure of a cylinder as the total edge-chain mass of the paths labelled sigma."""
    w = _require(base, sigma)
    chain = chain or edge_measure(base)
    if not w:
        return base.field.one
    total = base.field.zero
    for path in base.graph.paths(w):
        total = total + chain.cylinder(tuple(e.index for e in path))
    return total


def parry_markov(base: BetaBase, k: int) -> MarkovMeasure:
    """The Parry measure as a k-step Markov measure (exact when the shift has memory <= k)."""
    return markov_from_measure(parry_measure(base), k, name=f"parry[{base.poly}]^{k}")


def sample_parry(base: BetaBase, length: int, seed: int) -> tuple[int, ...]:
    """Seeded Parry-distributed digits: a stationary edge-chain sample read through the labels."""
    edges = sample(edge_measure(base), length, seed)
    label = {e.index: e.label for e in base.graph.edges}
    return tuple(label[e] for e in edges)


def markov_order(base: BetaBase) -> int | None:
    """Memory of the beta-shift when it is of finite type, else None."""
    if base.raw_expansion is None:
        return None
    return max(1, len(base.raw_expansion) - 1)


# ---------------------------------------------------------------------------
# occurrence statistics


def occ(tau, sigma) -> int:
    """Number of (overlapping) occurrences of tau in sigma."""
    t = tuple(as_word(tau)) if isinstance(tau, str) else tuple(tau)
    s = tuple(as_word(sigma)) if isinstance(sigma, str) else tuple(sigma)
    n = len(t)
    return sum(1 for i in range(len(s) - n + 1) if s[i : i + n] == t)


def count_blocks(s: Sequence, k: int) -> Counter:
    """Overlapping counts of every block of length 1..k in s."""
    counts: Counter = Counter()
    s = tuple(s)
    for n in range(1, k + 1):
        for i in range(len(s) - n + 1):
            counts[s[i : i + n]] += 1
    return counts


def geometric_checkpoints(limit: int, ratio: float = 1.5) -> list[int]:
    out = []
    j = 0
    while True:
        n = math.ceil(ratio**j)
        if n > limit:
            break
        if not out or n != out[-1]:
            out.append(n)
        j += 1
    if not out or out[-1] != limit:
        out.append(limit)
    return out


@dataclass
class BlockStat:
    word: tuple
    count: int
    ratio: Fraction
    expected: object | None
    deviation: float | None
    running_min: Fraction | None = None
    running_max: Fraction | None = None


@dataclass
class FrequencyProfile:
    N: int
    k: int
    blocks: list[BlockStat]
    base: str | None = None

    @property
    def max_deviation(self) -> float | None:
        devs = [b.deviation for b in self.blocks if b.deviation is not None]
        return max(devs) if devs else None

    def to_json(self) -> dict:
        return {
            "base": self.base,
            "N": self.N,
            "k": self.k,
            "blocks": [
                {
                    "word": word_str(b.word),
                    "count": b.count,
                    "ratio": float(b.ratio),
                    "expected": None if b.expected is None else float(approx(b.expected, 60)),
                    "deviation": b.deviation,
                    "running_min": None if b.running_min is None else float(b.running_min),
                    "running_max": None if b.running_max is None else float(b.running_max),
                }
                for b in self.blocks
            ],
            "max_deviation": self.max_deviation,
        }


def freq_profile(s: Sequence, k: int, measure: Measure | None = None, base: BetaBase | None = None,
                 checkpoints: Iterable[int] | None = None) -> FrequencyProfile:
    """Block frequencies occ(tau, s)/N for |tau| <= k, with deviation from ``measure``.

    Running minima and maxima of the ratios over the checkpoint schedule
    stand in for lower and upper limit frequencies.
    """
    s = tuple(s)
    N = len(s)
    alphabet = measure.alphabet if measure is not None else (base.alphabet if base is not None else tuple(sorted(set(s))))
    words = [()]
    allwords = []
    for _ in range(k):
        words = [w + (a,) for w in words for a in alphabet]
        allwords.extend(words)
    schedule = list(checkpoints) if checkpoints is not None else geometric_checkpoints(N)
    running: dict[tuple, list] = {w: [None, None] for w in allwords}
    counts: Counter = Counter()
    pos = 0
    for cp in schedule:
        cp = min(cp, N)
        for i in range(pos, cp):
            for n in range(1, k + 1):
                if i - n + 1 < 0:
                    break
                counts[s[i - n + 1 : i + 1]] += 1
        pos = cp
        if cp == 0:
            continue
        for w in allwords:
            r = Fraction(counts[w], cp)
            lo, hi = running[w]
            running[w] = [r if lo is None or r < lo else lo, r if hi is None or r > hi else hi]
    for i in range(pos, N):
        for n in range(1, k + 1):
            if i - n + 1 < 0:
                break
            counts[s[i - n + 1 : i + 1]] += 1
    stats = []
    for w in allwords:
        ratio = Fraction(counts[w], N) if N else Fraction(0)
        expected = deviation = None
        if measure is not None:
            expected = measure.cylinder(w)
            deviation = abs(float(ratio) - float(approx(expected, 60)))
        lo, hi = running[w]
        stats.append(BlockStat(w, counts[w], ratio, expected, deviation, lo, hi))
    return FrequencyProfile(N, k, stats, None if base is None else str(base.poly))


# ---------------------------------------------------------------------------
# symbol x state chain


@dataclass
class SymbolStateChain:
    """Joint chain of (recent symbols, automaton state before the current symbol).

    A node (w, q) means the current symbol is w[-1], the preceding context is
    w[:-1], and the automaton was in state q just before reading w[-1].  For
    1-step measures the window is the single current symbol.
    """

    dfa: Dfa
    measure: MarkovMeasure
    states: list
    transitions: dict
    stationary: dict
    ergodic_class: frozenset

    def factor_of(self, z, betting: Mapping) -> object:
        w, q = z
        return betting.get((q, w[-1]), 1)

    def growth_exponent(self, betting: Mapping) -> float:
        """sum_z kappa(z) log2 b(z); 0 for a table equal to 1 on the chain."""
        total = 0.0
        for z, kappa in self.stationary.items():
            if kappa == 0:
                continue
            b = self.factor_of(z, betting)
            if b == 1:
                continue
            if b == 0:
                return -math.inf
            total += float(approx(kappa, 60)) * _log2(b)
        return total

    def is_state_constant(self, betting: Mapping) -> bool:
        return all(self.factor_of(z, betting) == 1 for z, k in self.stationary.items() if k != 0)

    def growth_band(self, betting: Mapping) -> tuple[float, float]:
        """(exponent, asymptotic standard deviation of log2-capital per sqrt(step))."""
        zs = [z for z in self.states if z in self.stationary]
        idx = {z: i for i, z in enumerate(zs)}
        n = len(zs)
        p = np.zeros((n, n))
        for z, row in self.transitions.items():
            if z not in idx:
                continue
            for z2, v in row.items():
                if z2 in idx:
                    p[idx[z], idx[z2]] = float(approx(v, 60))
        pi = np.array([float(approx(self.stationary[z], 60)) for z in zs])
        f = np.array([-1e300 if self.factor_of(z, betting) == 0 else
                      (0.0 if self.factor_of(z, betting) == 1 else _log2(self.factor_of(z, betting))) for z in zs])
        g = float(pi @ f)
        fbar = f - g
        zmat = np.linalg.inv(np.eye(n) - p + np.outer(np.ones(n), pi))
        var = 2 * float(pi @ (fbar * (zmat @ fbar))) - float(pi @ (fbar * fbar))
        return g, math.sqrt(max(var, 0.0))


def symbol_state_chain(dfa: Dfa, m: MarkovMeasure, ergodic_class: Iterable | None = None) -> SymbolStateChain:
    """Build the joint chain over an ergodic class of ``dfa`` and solve its stationary law exactly."""
    k = m.order
    classes = [c for c in ergodic_classes(dfa) if c.ergodic]
    if ergodic_class is None:
        if len(classes) != 1:
            raise NotErgodicClass(f"automaton has {len(classes)} ergodic classes; choose one")
        target = classes[0].states
    else:
        target = frozenset(ergodic_class)
        if not any(c.states == target for c in classes):
            raise NotErgodicClass("requested states do not form an ergodic class")

    def succ(z):
        w, q = z
        q2 = dfa.step(q, w[-1])
        if q2 is None:
            raise NotSupported(f"automaton rejects a word of positive probability: {w!r}")
        row = m.cond.get(w[-k:], {})
        out = {}
        for a, p in row.items():
            if dfa.step(q2, a) is None:
                raise NotSupported("automaton rejects a word of positive probability")
            out[((w + (a,))[-k:], q2)] = p
        return out

    start = []
    for t in m.init:
        q = dfa.run(t[:-1])
        if q is None or dfa.step(q, t[-1]) is None:
            raise NotSupported(f"automaton rejects the initial block {t!r}")
        start.append((t, q))
    trans = {}
    todo = list(start)
    seen = set(start)
    while todo:
        z = todo.pop()
        row = succ(z)
        trans[z] = row
        for z2 in row:
            if z2 not in seen:
                seen.add(z2)
                todo.append(z2)
    g = nx.DiGraph()
    g.add_nodes_from(seen)
    g.add_edges_from((z, z2) for z, row in trans.items() for z2 in row)
    cond_graph = nx.condensation(g)
    sinks = [cond_graph.nodes[c]["members"] for c in cond_graph.nodes if cond_graph.out_degree(c) == 0]
    chosen = [s for s in sinks if all(q in target for _, q in s)]
    if len(chosen) != 1:
        raise NotSupported(f"expected one closed class over the ergodic class, found {len(chosen)}")
    members = sorted(chosen[0], key=lambda z: (tuple(map(str, z[0])), str(z[1])))
    idx = {z: i for i, z in enumerate(members)}
    zero = _zero_like([list(m.init.values())])
    one = _one_like([list(m.init.values())])
    p = [[zero] * len(members) for _ in members]
    for z in members:
        for z2, v in trans[z].items():
            p[idx[z]][idx[z2]] = v
    pi = solve_stationary(p, zero, one)
    if pi is None:
        raise NotSupported("joint chain has no unique stationary law")
    return SymbolStateChain(dfa, m, members, {z: trans[z] for z in members}, dict(zip(members, pi)), target)
