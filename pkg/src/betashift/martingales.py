"""Betting strategies against a measure.

A strategy is anything implementing the small :class:`Martingale` protocol:
a start state, a transition on one symbol, and the capital held in a state.
:class:`DfaMartingale` is the automaton-generated case, whose capital is
multiplied by a factor that depends only on the automaton state and the
symbol read.  The constructions below build such strategies for k-step
Markov measures and for the Parry measure of a sofic beta-shift, and two
wrappers turn a strategy into one with bounded drawdown
(:func:`savings_transform`) or an exactly fair one (:func:`repair_supermartingale`).
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Hashable, Iterable, Mapping, Sequence

from .algebraic import FieldElement, approx, render, sign
from .errors import (
    BadDelta,
    BadDeltaStar,
    InputError,
    NegativeSlack,
    NotAdmissible,
    NotIrreducible,
    NotSynchronizing,
    ZeroConditional,
)
from .measures import MarkovMeasure, Measure, _log2, count_blocks, geometric_checkpoints
from .shift_automaton import Dfa, LabeledGraph, synchronizes_to


def _is_zero(x) -> bool:
    return x == 0


def _as_fraction(x) -> Fraction:
    if isinstance(x, float):
        raise TypeError("betting parameters must be exact; pass a Fraction or a string like '1/2'")
    return Fraction(x)


# ---------------------------------------------------------------------------
# protocol


class Martingale:
    """Strategy protocol; ``kind`` is 'martingale' or 'supermartingale'."""

    kind: str = "martingale"
    alphabet: tuple = ()

    def start(self):
        raise NotImplementedError

    def advance(self, state, a):
        """State after reading ``a``; raises NotAdmissible off the support."""
        raise NotImplementedError

    def capital(self, state):
        raise NotImplementedError

    def evaluate(self, word):
        st = self.start()
        for a in word:
            st = self.advance(st, a)
        return self.capital(st)


def evaluate(mart: Martingale, word):
    """Capital after betting along ``word``."""
    return mart.evaluate(tuple(word))


# ---------------------------------------------------------------------------
# automaton-generated strategies


@dataclass
class Trajectory:
    """Capital checkpoints of a streamed run, plus exact per-factor tallies."""

    checkpoints: list[tuple[int, float, float]]
    tallies: dict
    initial_capital: object = 1

    @property
    def final(self) -> tuple[int, float, float]:
        return self.checkpoints[-1]

    @property
    def max_rate(self) -> float:
        return max(r for _, _, r in self.checkpoints)

    def exact_capital(self):
        """Exact capital as initial * prod factor^count (can be large)."""
        c = self.initial_capital
        for f, n in self.tallies.items():
            c = c * f**n
        return c

    def to_csv(self) -> str:
        lines = ["N,capital_log2,rate"]
        for n, lg, r in self.checkpoints:
            lines.append(f"{n},{lg!r},{r!r}")
        return "\n".join(lines) + "\n"

    def to_json(self) -> dict:
        return {
            "checkpoints": [{"N": n, "capital_log2": lg, "rate": r} for n, lg, r in self.checkpoints],
            "tallies": [{"factor": render(f), "count": n} for f, n in sorted(self.tallies.items(), key=lambda kv: float(approx(kv[0], 60)))],
        }


class DfaMartingale(Martingale):
    """Capital multiplied by ``betting[(q, a)]`` (default 1) on reading ``a`` in state ``q``."""

    def __init__(self, automaton: Dfa, betting: Mapping, initial_capital=Fraction(1),
                 kind: str = "martingale", name: str = "", params: dict | None = None):
        if kind not in ("martingale", "supermartingale"):
            raise ValueError(f"unknown kind {kind!r}")
        self.automaton = automaton
        self.alphabet = automaton.alphabet
        self.betting = {k: v for k, v in betting.items() if v != 1}
        for k, v in self.betting.items():
            if sign(v) < 0:
                raise InputError(f"negative betting factor at {k!r}")
        self.initial_capital = initial_capital
        self.kind = kind
        self.name = name
        self.params = dict(params or {})

    def __repr__(self) -> str:
        return f"DfaMartingale({self.name or 'unnamed'}, {len(self.automaton.states)} states)"

    def factor(self, q, a):
        return self.betting.get((q, a), 1)

    def start(self):
        return (self.automaton.initial, self.initial_capital)

    def advance(self, state, a):
        q, cap = state
        q2 = self.automaton.step(q, a)
        if q2 is None:
            raise NotAdmissible(f"symbol {a!r} not admissible in state {q!r}")
        f = self.betting.get((q, a), 1)
        return (q2, cap if f == 1 else cap * f)

    def capital(self, state):
        return state[1]

    def factor_values(self) -> set:
        """Distinct factors over reachable (state, admissible symbol) pairs."""
        out = set()
        for q in self.automaton.reachable():
            for a in self.automaton.allowed(q):
                out.add(self.factor(q, a))
        return out

    def run(self, stream: Iterable, checkpoints: Iterable[int] | None = None, limit: int | None = None) -> Trajectory:
        """Stream digits through the automaton, logging log2-capital at each checkpoint.

        Without a schedule, checkpoints are ceil(1.5^j) up to ``limit`` (which
        is then required) or the length of a sized stream.
        """
        if checkpoints is None:
            if limit is None:
                if not hasattr(stream, "__len__"):
                    raise ValueError("need a checkpoint schedule or a limit for an unsized stream")
                limit = len(stream)  # type: ignore[arg-type]
            checkpoints = geometric_checkpoints(limit)
        schedule = sorted(set(checkpoints))
        trans = self.automaton.transitions
        factors: list = [1]
        index = {1: 0}
        counts = [0]
        table: dict = {}
        q = self.automaton.initial
        out = []
        log0 = _log2(self.initial_capital) if self.initial_capital != 0 else -math.inf
        it = iter(stream)
        n = 0
        for cp in schedule:
            while n < cp:
                try:
                    a = next(it)
                except StopIteration:
                    break
                key = (q, a)
                hit = table.get(key)
                if hit is None:
                    q2 = trans.get(key)
                    if q2 is None:
                        raise NotAdmissible(f"digit {a!r} at position {n} is not admissible")
                    f = self.betting.get(key, 1)
                    if f not in index:
                        index[f] = len(factors)
                        factors.append(f)
                        counts.append(0)
                    hit = (q2, index[f])
                    table[key] = hit
                q, j = hit
                counts[j] += 1
                n += 1
            lg = log0
            for f, c in zip(factors, counts):
                if c and f != 1:
                    lg = -math.inf if f == 0 else lg + c * _log2(f)
            out.append((n, lg, lg / n if n else 0.0))
            if n < cp:
                break
        return Trajectory(out, {f: c for f, c in zip(factors, counts) if c}, self.initial_capital)

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "kind": self.kind,
            "initial_capital": render(self.initial_capital),
            "params": {k: _jsonable(v) for k, v in sorted(self.params.items())},
            "automaton": self.automaton.to_json(),
            "betting": [
                {"state": str(q), "symbol": str(a), "factor": render(f)}
                for (q, a), f in sorted(self.betting.items(), key=lambda kv: (str(kv[0][0]), str(kv[0][1])))
            ],
        }


def _jsonable(v):
    if isinstance(v, (FieldElement, Fraction)):
        return render(v)
    if isinstance(v, tuple):
        return [_jsonable(x) for x in v]
    return v


def constant_martingale(automaton: Dfa, capital=Fraction(1)) -> DfaMartingale:
    return DfaMartingale(automaton, {}, capital, name="constant")


# ---------------------------------------------------------------------------
# fairness


@dataclass
class FairnessReport:
    ok: bool
    kind: str
    depth: int
    checked: int
    violation: dict | None = None

    def to_json(self) -> dict:
        return {"ok": self.ok, "kind": self.kind, "depth": self.depth, "checked": self.checked, "violation": self.violation}


def check_fairness(mart: Martingale, measure: Measure, depth: int) -> FairnessReport:
    """Exact check of sum_a P(a|sigma) M(sigma a) = M(sigma) (or <= for supermartingales).

    Every word of positive measure up to length ``depth`` is visited; the
    first failing word is reported.  Negative capital and bets on symbols
    the strategy cannot read also count as violations.
    """
    checked = 0
    layer = [((), mart.start(), measure.predictor())]
    for _ in range(depth + 1):
        nxt = []
        for word, st, pr in layer:
            cap = mart.capital(st)
            if sign(cap) < 0:
                return FairnessReport(False, mart.kind, depth, checked, {"word": list(word), "reason": "negative capital"})
            total = None
            for a, p in pr.probs().items():
                try:
                    child = mart.advance(st, a)
                except NotAdmissible:
                    return FairnessReport(False, mart.kind, depth, checked,
                                          {"word": list(word) + [a], "reason": "strategy cannot read a word of positive measure"})
                term = p * mart.capital(child)
                total = term if total is None else total + term
                if len(word) < depth:
                    nxt.append((word + (a,), child, pr.push(a)))
            if total is None:
                continue
            checked += 1
            diff = total - cap
            bad = (diff != 0) if mart.kind == "martingale" else (sign(diff) > 0)
            if bad:
                return FairnessReport(False, mart.kind, depth, checked,
                                      {"word": list(word), "capital": render(cap), "expected_next": render(total)})
        layer = nxt
    return FairnessReport(True, mart.kind, depth, checked)


# ---------------------------------------------------------------------------
# automaton helpers


def _kmp_table(pattern: Sequence, alphabet: Sequence) -> dict[tuple[int, Hashable], int]:
    """Transitions of the automaton tracking the longest suffix that is a prefix of ``pattern``."""
    pattern = tuple(pattern)
    n = len(pattern)
    delta = {(0, a): 0 for a in alphabet}
    if n == 0:
        return delta
    delta[(0, pattern[0])] = 1
    restart = 0
    for j in range(1, n + 1):
        for a in alphabet:
            delta[(j, a)] = delta[(restart, a)]
        if j < n:
            delta[(j, pattern[j])] = j + 1
            restart = delta[(restart, pattern[j])]
    return delta


def _product(first: Mapping, first_init, second: Dfa) -> tuple[Dfa, list]:
    """Product of a complete transition table with a partial automaton, restricted to reachable pairs."""
    init = (first_init, second.initial)
    trans = {}
    states = [init]
    seen = {init}
    i = 0
    while i < len(states):
        j, q = states[i]
        i += 1
        for a in second.alphabet:
            q2 = second.step(q, a)
            if q2 is None:
                continue
            z = (first[(j, a)], q2)
            trans[((j, q), a)] = z
            if z not in seen:
                seen.add(z)
                states.append(z)
    return Dfa(tuple(states), second.alphabet, trans, init), states


def _check_delta(delta, p_star) -> Fraction | FieldElement:
    if not (0 < p_star < 1):
        raise BadDelta(f"need 0 < p* < 1, got {float(approx(p_star, 60))}")
    limit = (1 - p_star) / p_star
    if not (sign(delta) > 0 and sign(delta - limit) < 0):
        raise BadDelta(f"delta must lie in (0, {float(approx(limit, 60)):.6g})")
    return 1 - delta * p_star / (1 - p_star)


# ---------------------------------------------------------------------------
# Case I: inflate one conditional


def construct_case1(measure: MarkovMeasure, sigma, b, delta, tracker: str = "suffix") -> DfaMartingale:
    """Bet that b follows sigma more often than P(sigma b | sigma).

    After each occurrence of sigma the capital is multiplied by (1+delta) if the
    next digit is b and by 1 - delta p*/(1-p*) otherwise, with
    p* = P(sigma b | sigma).  ``tracker`` selects the automaton: 'suffix'
    follows the longest suffix matching a prefix of sigma, 'window' keeps the
    last |sigma| digits.
    """
    sigma = tuple(sigma)
    delta = _as_fraction(delta) if not isinstance(delta, FieldElement) else delta
    if len(sigma) < measure.order:
        raise InputError(f"sigma must have length at least the measure order {measure.order}")
    if measure.cylinder(sigma) == 0:
        raise ZeroConditional(f"P({sigma!r}) = 0")
    p_star = measure.conditional(sigma, b)
    lose = _check_delta(delta, p_star)
    win = 1 + delta
    support = measure.support_dfa()
    k = measure.order
    betting = {}
    if tracker == "suffix":
        table = _kmp_table(sigma, measure.alphabet)
        dfa, states = _product(table, 0, support)
        for (j, ctx) in states:
            if j != len(sigma):
                continue
            for a in support.allowed(ctx):
                betting[((j, ctx), a)] = win if a == b else lose
    elif tracker == "window":
        n = len(sigma)
        init = ()
        trans = {}
        states = [init]
        seen = {init}
        i = 0
        while i < len(states):
            w = states[i]
            i += 1
            ctx = w[-k:] if len(w) >= k else w
            for a in support.allowed(ctx):
                w2 = (w + (a,))[-n:]
                trans[(w, a)] = w2
                if w == sigma:
                    betting[(w, a)] = win if a == b else lose
                if w2 not in seen:
                    seen.add(w2)
                    states.append(w2)
        dfa = Dfa(tuple(states), measure.alphabet, trans, init)
    else:
        raise ValueError(f"unknown tracker {tracker!r}")
    params = {"sigma": sigma, "b": b, "delta": delta, "p_star": p_star, "win": win, "lose": lose}
    return DfaMartingale(dfa, betting, name=f"case1[{_w(sigma)}->{b}]", params=params)


def _w(word) -> str:
    return "".join(str(x) for x in word)


def case1_rate(p_star, delta, sigma_frequency) -> float:
    """Per-digit log2 growth when sigma has frequency m and is followed by b at ratio exactly (1+delta)p*.

    m p* [(1+delta) log2(1+delta) + (x - delta) log2(1 - delta/x)] with x = 1/p* - 1;
    the rate at any higher ratio is larger.
    """
    p = float(approx(p_star, 60))
    d = float(approx(delta, 60))
    m = float(approx(sigma_frequency, 60))
    x = 1 / p - 1
    return m * p * ((1 + d) * math.log2(1 + d) + (x - d) * math.log2(1 - d / x))


# ---------------------------------------------------------------------------
# Case II: deflate one block transition, then lift to single digits


def construct_case2(measure: MarkovMeasure, sigma, rho, delta) -> DfaMartingale:
    """Bet that block rho follows block sigma less often than P(sigma rho | sigma).

    The block strategy reads the sequence as consecutive non-overlapping
    k-blocks: after block sigma it multiplies by (1+delta) on any block other
    than rho and by 1 - delta p*/(1-p*) on rho, where p* = 1 - P(sigma rho|sigma).
    The returned strategy bets digit by digit; inside a block its capital is
    the conditional expectation of the block capital at the block's end, so
    it agrees with the block strategy at every block boundary.  The block
    strategy is kept as ``block_martingale``.
    """
    k = measure.order
    sigma, rho = tuple(sigma), tuple(rho)
    delta = _as_fraction(delta) if not isinstance(delta, FieldElement) else delta
    if len(sigma) != k or len(rho) != k:
        raise InputError(f"sigma and rho must be blocks of length {k}")
    if sigma not in measure.blocks or rho not in measure.blocks:
        raise ZeroConditional("sigma and rho must have positive measure")
    if not measure.is_irreducible():
        raise NotIrreducible("block chain is reducible")
    p_rho = measure.block_transition(sigma, rho)
    if p_rho == 0:
        raise ZeroConditional("rho never follows sigma")
    p_star = 1 - p_rho
    lose = _check_delta(delta, p_star)
    win = 1 + delta
    blocks = measure.blocks

    def block_factor(prev, tau):
        if prev != sigma:
            return 1
        return lose if tau == rho else win

    # block-level strategy on the alphabet of blocks
    btrans = {}
    bbet = {}
    for t in blocks:
        btrans[(None, t)] = t
    for s in blocks:
        for t in blocks:
            if measure.block_transition(s, t) != 0:
                btrans[(s, t)] = t
                f = block_factor(s, t)
                if f != 1:
                    bbet[(s, t)] = f
    block_dfa = Dfa((None,) + blocks, blocks, btrans, None)
    block_mart = DfaMartingale(block_dfa, bbet, name=f"case2-blocks[{_w(sigma)}|{_w(rho)}]",
                               params={"sigma": sigma, "rho": rho, "delta": delta, "p_star": p_star})
    block_measure = measure.induced_one_step()

    # expected block factor given the previous block and a partial block
    cache: dict = {}

    def weight(prev, gamma):
        key = (prev, gamma)
        if key in cache:
            return cache[key]
        if prev is None:
            val = Fraction(1)
        elif len(gamma) == k:
            val = block_factor(prev, gamma)
        else:
            ctx = (prev + gamma)[-k:]
            val = None
            for a, p in measure.cond.get(ctx, {}).items():
                term = p * weight(prev, gamma + (a,))
                val = term if val is None else val + term
        cache[key] = val
        return val

    init = (None, ())
    trans = {}
    betting = {}
    states = [init]
    seen = {init}
    i = 0
    while i < len(states):
        prev, gamma = states[i]
        i += 1
        if prev is None:
            options = [a for a in measure.alphabet if measure._prefix_mass(gamma + (a,)) != 0]
        else:
            ctx = (prev + gamma)[-k:]
            options = [a for a in measure.alphabet if measure.cond.get(ctx, {}).get(a, 0) != 0]
        for a in options:
            g2 = gamma + (a,)
            w_old = weight(prev, gamma)
            w_new = weight(prev, g2)
            f = w_new / w_old
            z = (g2, ()) if len(g2) == k else (prev, g2)
            trans[((prev, gamma), a)] = z
            if f != 1:
                betting[((prev, gamma), a)] = f
            if z not in seen:
                seen.add(z)
                states.append(z)
    dfa = Dfa(tuple(states), measure.alphabet, trans, init)
    params = {"sigma": sigma, "rho": rho, "delta": delta, "p_star": p_star, "win": win, "lose": lose}
    mart = DfaMartingale(dfa, betting, name=f"case2[{_w(sigma)}|{_w(rho)}]", params=params)
    mart.block_martingale = block_mart  # type: ignore[attr-defined]
    mart.block_measure = block_measure  # type: ignore[attr-defined]
    return mart


# ---------------------------------------------------------------------------
# deviant blocks


@dataclass(frozen=True)
class DeviantBlock:
    sigma: tuple
    b: Hashable
    ratio: Fraction
    p_star: object
    excess: float
    delta: Fraction

    def to_json(self) -> dict:
        return {
            "sigma": _w(self.sigma),
            "b": str(self.b),
            "ratio": float(self.ratio),
            "p_star": render(self.p_star),
            "excess": self.excess,
            "delta": str(self.delta),
        }


def detect_deviant_block(s: Sequence, measure: Measure, k: int, delta, min_length: int = 1,
                         bet_fraction=Fraction(9, 10)) -> DeviantBlock | None:
    """Block sigma (min_length <= |sigma| <= k) and digit b with occ(sigma b)/occ(sigma) > (1+delta) P(b|sigma).

    The witness with the largest relative excess ratio/p* - 1 wins; ties go
    to the shorter, then lexicographically smaller, pair.  The returned
    ``delta`` is a betting parameter for a Case I strategy on the witness:
    ``bet_fraction`` of the observed excess, kept below (1-p*)/p*.
    """
    s = tuple(s)
    delta = Fraction(delta) if not isinstance(delta, float) else Fraction(delta).limit_denominator(10**6)
    counts = count_blocks(s, k + 1)
    tail = Counter(s[len(s) - n :] for n in range(1, k + 1))  # occurrences with no following digit
    best = None
    for (word, c) in counts.items():
        if not (min_length <= len(word) <= k):
            continue
        pw = measure.cylinder(word)
        if pw == 0:
            continue
        followed = c - tail[word]
        if followed <= 0:
            continue
        for b in measure.alphabet:
            hits = counts.get(word + (b,), 0)
            if hits == 0:
                continue
            p = measure.cylinder(word + (b,)) / pw
            if p == 0 or p == 1:
                continue
            ratio = Fraction(hits, followed)
            pf = float(approx(p, 60))
            if not ratio > (1 + delta) * approx(p, 80):
                continue
            excess = float(ratio) / pf - 1
            key = (-excess, len(word), word, b)
            if best is None or key < best[0]:
                best = (key, word, b, ratio, p, excess)
    if best is None:
        return None
    _, word, b, ratio, p, excess = best
    x = (1 - p) / p
    xf = float(approx(x, 60))
    bet = Fraction(min(float(bet_fraction) * excess, float(bet_fraction) * xf)).limit_denominator(1000)
    while not (0 < bet and sign(bet - x) < 0):
        bet = bet / 2
    return DeviantBlock(word, b, ratio, p, excess, bet)


# ---------------------------------------------------------------------------
# sofic shifts: strategies defined on the edges of a presentation


def construct_sofic_sync(graph: LabeledGraph, edge_mart: DfaMartingale, rho) -> DfaMartingale:
    """Carry a strategy on edge sequences over to label sequences.

    A prefix matcher waits for the synchronizing word rho; every mismatch
    returns it to the first matcher state.  Once rho has been read the
    current node is known, and from then on each label determines its edge,
    which is fed to the edge strategy.  Before synchronisation the stake is
    kept (factor 1) and admissibility is tracked through the set of
    possible nodes.
    """
    rho = tuple(rho)
    node0 = synchronizes_to(graph, rho)
    if node0 is None or not rho:
        raise NotSynchronizing(f"{_w(rho)} does not synchronize the presentation")
    inner = edge_mart.automaton
    all_nodes = frozenset(graph.nodes)
    init = ("wait", 0, all_nodes)
    trans = {}
    betting = {}
    states = [init]
    seen = {init}
    i = 0
    while i < len(states):
        z = states[i]
        i += 1
        for a in graph.alphabet:
            if z[0] == "wait":
                _, j, nodes = z
                image = graph.subset_image(nodes, a)
                if not image:
                    continue
                if rho[j] == a:
                    z2 = ("run", inner.initial, node0) if j + 1 == len(rho) else ("wait", j + 1, image)
                else:
                    z2 = ("wait", 0, image)
            else:
                _, qh, node = z
                e = graph.follow(node, a)
                if e is None:
                    continue
                qh2 = inner.step(qh, e.index)
                if qh2 is None:
                    continue
                z2 = ("run", qh2, e.dest)
                f = edge_mart.factor(qh, e.index)
                if f != 1:
                    betting[(z, a)] = f
            trans[(z, a)] = z2
            if z2 not in seen:
                seen.add(z2)
                states.append(z2)
    dfa = Dfa(tuple(states), tuple(graph.alphabet), trans, init)
    params = dict(edge_mart.params)
    params.update({"rho": rho, "sync_node": node0})
    return DfaMartingale(dfa, betting, edge_mart.initial_capital, kind=edge_mart.kind,
                         name=f"sync[{_w(rho)}]({edge_mart.name})", params=params)


def longest_prefix_seen(alpha, s: Sequence, start: int = 0) -> int:
    """Largest N such that alpha[:N] occurs in s[start:]; a finite proxy for 'occurs infinitely often'."""
    alpha = tuple(alpha)
    data = tuple(s[start:])
    best = 0
    for n in range(1, len(alpha) + 1):
        head = alpha[:n]
        if any(data[i : i + n] == head for i in range(len(data) - n + 1)):
            best = n
        else:
            break
    return best


def construct_sofic_nosync(graph: LabeledGraph, edge_measure: MarkovMeasure, alpha, delta_star, n_alpha: int) -> DfaMartingale:
    """Supermartingale for sequences in which alpha[:n_alpha+1] eventually stops occurring.

    With pi = alpha[:n_alpha] and c = alpha[n_alpha], whenever the past ends
    in pi and c could come next, the capital is multiplied by (1-delta*) on c
    and by (1+delta) on any other digit.  Here delta = delta* K with K the
    least positive edge transition probability into an edge labelled c (from
    an edge labelled pi[-1] when pi is nonempty).
    """
    alpha = tuple(alpha)
    delta_star = _as_fraction(delta_star) if not isinstance(delta_star, FieldElement) else delta_star
    if not (0 <= delta_star < 1):
        raise BadDeltaStar("delta* must lie in [0, 1)")
    if synchronizes_to(graph, alpha) is None:
        raise NotSynchronizing(f"{_w(alpha)} does not synchronize the presentation")
    if not 0 <= n_alpha < len(alpha):
        raise InputError("n_alpha must satisfy 0 <= n_alpha < |alpha|")
    pi, c = alpha[:n_alpha], alpha[n_alpha]
    edges = {e.index: e for e in graph.edges}
    candidates = []
    for (e,), row in edge_measure.cond.items():
        if pi and edges[e].label != pi[-1]:
            continue
        for f, p in row.items():
            if edges[f].label == c and p != 0:
                candidates.append(p)
    if not candidates:
        raise InputError(f"no edge labelled {c} can follow")
    K = min(candidates, key=lambda v: approx(v, 80))
    delta = delta_star * K
    win, lose = 1 + delta, 1 - delta_star
    table = _kmp_table(pi, graph.alphabet) if pi else {(0, a): 0 for a in graph.alphabet}
    init = (0, frozenset(graph.nodes))
    trans = {}
    betting = {}
    states = [init]
    seen = {init}
    i = 0
    while i < len(states):
        z = states[i]
        i += 1
        j, nodes = z
        active = j == len(pi) and bool(graph.subset_image(nodes, c))
        for a in graph.alphabet:
            image = graph.subset_image(nodes, a)
            if not image:
                continue
            z2 = (table[(j, a)], image)
            trans[(z, a)] = z2
            if active and delta_star != 0:
                betting[(z, a)] = lose if a == c else win
            if z2 not in seen:
                seen.add(z2)
                states.append(z2)
    dfa = Dfa(tuple(states), tuple(graph.alphabet), trans, init)
    params = {"alpha": alpha, "n_alpha": n_alpha, "c": c, "delta_star": delta_star, "K": K, "delta": delta,
              "win": win, "lose": lose}
    return DfaMartingale(dfa, betting, kind="supermartingale", name=f"nosync[{_w(alpha)}:{n_alpha}]", params=params)


# ---------------------------------------------------------------------------
# savings and repair


class SavingsMartingale(Martingale):
    """Bank winnings so that capital never falls more than 2 * M(empty) below a past value.

    The active stake starts at c0 = M(empty) and follows the inner
    strategy's factors.  When it reaches 2 c0, everything above c0 moves to a
    savings account that is never bet again.  Capital is savings plus stake,
    and the drawdown after any word is below 2 c0 (``savings_constant``).
    """

    def __init__(self, inner: Martingale):
        self.inner = inner
        self.kind = inner.kind
        self.alphabet = inner.alphabet
        self.c0 = inner.capital(inner.start())
        if sign(self.c0) <= 0:
            raise InputError("savings transform needs positive initial capital")
        self.savings_constant = 2 * self.c0
        self.name = f"savings({getattr(inner, 'name', '')})"

    def start(self):
        return (self.inner.start(), self.c0 * 0, self.c0)

    def advance(self, state, a):
        st, saved, active = state
        st2 = self.inner.advance(st, a)
        if isinstance(self.inner, DfaMartingale):
            f = self.inner.factor(st[0], a)
            if f != 1:
                active = active * f
        else:
            before = self.inner.capital(st)
            after = self.inner.capital(st2)
            if before == 0:
                active = self.c0 * 0
            elif after != before:
                active = active * after / before
        if sign(active - 2 * self.c0) >= 0:
            saved = saved + active - self.c0
            active = self.c0
        return (st2, saved, active)

    def capital(self, state):
        return state[1] + state[2]

    def savings(self, state):
        return state[1]

    def run(self, stream: Iterable, checkpoints: Iterable[int]) -> list[tuple[int, float, float]]:
        """Floating-point streamed run for a DFA inner strategy: (N, capital, savings) at checkpoints."""
        inner = self.inner
        if not isinstance(inner, DfaMartingale):
            raise TypeError("streamed savings runs need an automaton strategy")
        c0 = float(approx(self.c0, 60))
        fl: dict = {}
        q = inner.automaton.initial
        saved, active = 0.0, c0
        out = []
        it = iter(stream)
        n = 0
        for cp in sorted(set(checkpoints)):
            while n < cp:
                try:
                    a = next(it)
                except StopIteration:
                    break
                key = (q, a)
                hit = fl.get(key)
                if hit is None:
                    q2 = inner.automaton.step(q, a)
                    if q2 is None:
                        raise NotAdmissible(f"digit {a!r} at position {n} is not admissible")
                    hit = (q2, float(approx(inner.factor(q, a), 60)))
                    fl[key] = hit
                q, f = hit
                active *= f
                if active >= 2 * c0:
                    saved += active - c0
                    active = c0
                n += 1
            out.append((n, saved + active, saved))
            if n < cp:
                break
        return out


def savings_transform(mart: Martingale) -> SavingsMartingale:
    return SavingsMartingale(mart)


class RepairedMartingale(Martingale):
    """Adds back each round's expected loss, turning a supermartingale into a fair strategy.

    The slack at sigma is M(sigma) - sum_a P(a|sigma) M(sigma a); the repaired
    capital at sigma is M(sigma) plus the slack accumulated over the proper
    prefixes of sigma.
    """

    kind = "martingale"

    def __init__(self, inner: Martingale, measure: Measure):
        self.inner = inner
        self.measure = measure
        self.alphabet = inner.alphabet
        self.name = f"repair({getattr(inner, 'name', '')})"

    def start(self):
        st = self.inner.start()
        return (st, self.measure.predictor(), self.inner.capital(st) * 0)

    def slack(self, state):
        st, pr, _acc = state
        cap = self.inner.capital(st)
        total = cap * 0
        for a, p in pr.probs().items():
            total = total + p * self.inner.capital(self.inner.advance(st, a))
        return cap - total

    def advance(self, state, a):
        st, pr, acc = state
        d = self.slack(state)
        if sign(d) < 0:
            raise NegativeSlack("input strategy gains in expectation, so it is not a supermartingale")
        return (self.inner.advance(st, a), pr.push(a), acc + d)

    def capital(self, state):
        return self.inner.capital(state[0]) + state[2]


def repair_supermartingale(mart: Martingale, measure: Measure) -> RepairedMartingale:
    return RepairedMartingale(mart, measure)


# ---------------------------------------------------------------------------
# exact rates on eventually periodic fixtures


def cycle_rate(mart: DfaMartingale, pre: Sequence, period: Sequence) -> float:
    """Limit of log2-capital / N along pre (period)^inf, computed from the eventual cycle of states."""
    dfa = mart.automaton
    q = dfa.run(tuple(pre))
    if q is None:
        raise NotAdmissible("fixture prefix is not admissible")
    seen = {}
    logs = []
    t = 0
    while q not in seen:
        seen[q] = t
        lg = 0.0
        for a in period:
            f = mart.factor(q, a)
            lg = -math.inf if f == 0 else lg + (0.0 if f == 1 else _log2(f))
            q = dfa.step(q, a)
            if q is None:
                raise NotAdmissible("fixture is not admissible")
        logs.append(lg)
        t += 1
    start = seen[q]
    loop = logs[start:]
    return sum(loop) / (len(loop) * len(period))


def fixture_stream(pre: Sequence, period: Sequence, length: int):
    pre, period = tuple(pre), tuple(period)
    for i in range(length):
        yield pre[i] if i < len(pre) else period[(i - len(pre)) % len(period)]
