"""Automata and labelled graphs for beta-shift languages.

:class:`Dfa` is a deterministic acceptor with a partial transition map; a
missing transition stands for the implicit garbage state.  :class:`LabeledGraph`
is an edge-labelled directed graph used as a presentation of a sofic shift.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Sequence

import networkx as nx

from .beta_expansion import BetaBase, as_word, word_str
from .errors import InvariantViolation, NoSynchronizingWord, NotAdmissible


@dataclass(frozen=True, eq=False)
class Dfa:
    """Deterministic automaton with partial transitions.

    ``transitions`` maps (state, symbol) to the next state; an absent key
    means the word has fallen into the garbage state.
    """

    states: tuple
    alphabet: tuple
    transitions: dict
    initial: Hashable
    accepting: frozenset = None  # type: ignore[assignment]

    def __post_init__(self):
        if self.accepting is None:
            object.__setattr__(self, "accepting", frozenset(self.states))

    def step(self, state, symbol):
        return self.transitions.get((state, symbol))

    def run(self, word, state=None):
        """State reached after reading ``word`` (None once in garbage)."""
        q = self.initial if state is None else state
        for a in word:
            q = self.transitions.get((q, a))
            if q is None:
                return None
        return q

    def accepts(self, word) -> bool:
        q = self.run(word)
        return q is not None and q in self.accepting

    def allowed(self, state) -> list:
        return [a for a in self.alphabet if (state, a) in self.transitions]

    def reachable(self) -> set:
        seen = {self.initial}
        todo = [self.initial]
        while todo:
            q = todo.pop()
            for a in self.alphabet:
                r = self.transitions.get((q, a))
                if r is not None and r not in seen:
                    seen.add(r)
                    todo.append(r)
        return seen

    def to_dot(self, name: str = "dfa") -> str:
        lines = [f"digraph {name} {{", "  rankdir=LR;", '  __start [shape=point, label=""];']
        for q in self.states:
            shape = "doublecircle" if q in self.accepting else "circle"
            lines.append(f'  "{q}" [shape={shape}];')
        lines.append(f'  __start -> "{self.initial}";')
        for (q, a), r in sorted(self.transitions.items(), key=lambda kv: (str(kv[0][0]), str(kv[0][1]))):
            lines.append(f'  "{q}" -> "{r}" [label="{a}"];')
        lines.append("}")
        return "\n".join(lines)

    def to_json(self) -> dict:
        return {
            "states": [str(q) for q in self.states],
            "alphabet": [str(a) for a in self.alphabet],
            "initial": str(self.initial),
            "accepting": sorted(str(q) for q in self.accepting),
            "transitions": [
                {"from": str(q), "symbol": str(a), "to": str(r)}
                for (q, a), r in sorted(self.transitions.items(), key=lambda kv: (str(kv[0][0]), str(kv[0][1])))
            ],
        }


def beta_dfa(base: BetaBase) -> Dfa:
    """Acceptor of the beta-shift language.

    State i records the position in the expansion of 1 being shadowed.
    Reading its digit advances (wrapping onto the period); a smaller digit
    resets to 0; a larger digit is rejected.
    """
    span = base.m + base.n
    trans = {}
    for i in range(span):
        d = base.s_digit(i)
        for a in range(d):
            trans[(i, a)] = 0
        trans[(i, d)] = i + 1 if i + 1 < span else base.m
    return Dfa(tuple(range(span)), base.alphabet, trans, 0)


def admissible_lex(base: BetaBase, sigma) -> bool:
    """Direct check: every suffix of sigma is lexicographically <= the expansion of 1."""
    w = as_word(sigma)
    for i in range(len(w)):
        suffix = w[i:]
        pref = base.s_prefix(len(suffix))
        if suffix > pref:
            return False
    return True


def is_admissible(base: BetaBase, sigma) -> bool:
    w = as_word(sigma)
    if any(not 0 <= d < base.alphabet_size for d in w):
        return False
    return base.dfa.accepts(w)


# ---------------------------------------------------------------------------
# boundary combinatorics


class _Boundary:
    """Marker: no admissible word of the same length lies above."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "Boundary"

    def __bool__(self) -> bool:
        return False


Boundary = _Boundary()


@dataclass(frozen=True)
class BoundaryInfo:
    successors: tuple[int, ...]
    top: int
    next: tuple[int, ...] | _Boundary
    n_sigma: int
    in_l: bool


def successors(base: BetaBase, sigma) -> tuple[int, ...]:
    """Digits b with sigma b admissible; always an initial segment 0..r."""
    q = base.dfa.run(as_word(sigma))
    if q is None:
        raise NotAdmissible(f"{word_str(as_word(sigma))} is not admissible")
    return tuple(base.dfa.allowed(q))


def next_word(base: BetaBase, sigma):
    """Least admissible word of the same length strictly above sigma, or Boundary."""
    w = as_word(sigma)
    dfa = base.dfa
    states = [dfa.initial]
    for a in w:
        q = dfa.step(states[-1], a)
        if q is None:
            raise NotAdmissible(f"{word_str(w)} is not admissible")
        states.append(q)
    for i in range(len(w) - 1, -1, -1):
        if dfa.step(states[i], w[i] + 1) is not None:
            return w[:i] + (w[i] + 1,) + (0,) * (len(w) - i - 1)
    return Boundary


def n_sigma(base: BetaBase, sigma) -> int:
    """Start of the longest suffix of sigma that is a prefix of the expansion of 1."""
    w = as_word(sigma)
    for n in range(len(w) + 1):
        tail = w[n:]
        if tail == base.s_prefix(len(tail)):
            return n
    return len(w)  # unreachable: the empty suffix always matches


def in_l(base: BetaBase, sigma) -> bool:
    """True when sigma is nonempty and its last digit is below the top successor of its prefix."""
    w = as_word(sigma)
    if not w:
        return False
    return w[-1] != successors(base, w[:-1])[-1]


def boundary_combinatorics(base: BetaBase, sigma) -> BoundaryInfo:
    w = as_word(sigma)
    if not is_admissible(base, w):
        raise NotAdmissible(f"{word_str(w)} is not admissible")
    suc = successors(base, w)
    return BoundaryInfo(suc, suc[-1], next_word(base, w), n_sigma(base, w), in_l(base, w))


def admissible_words(base: BetaBase, length: int) -> list[tuple[int, ...]]:
    """All admissible words of the given length in lexicographic order."""
    dfa = base.dfa
    layer = [((), dfa.initial)]
    for _ in range(length):
        nxt = []
        for w, q in layer:
            for a in dfa.allowed(q):
                nxt.append((w + (a,), dfa.step(q, a)))
        layer = nxt
    return [w for w, _ in layer]


def admissible_words_upto(base: BetaBase, length: int) -> list[tuple[int, ...]]:
    out = []
    for n in range(length + 1):
        out.extend(admissible_words(base, n))
    return out


def minimal_forbidden_words(base: BetaBase, max_length: int) -> list[str]:
    """Inadmissible words all of whose proper factors are admissible."""
    out = []
    for n in range(1, max_length + 1):
        for w in admissible_words(base, n - 1):
            for a in base.alphabet:
                cand = w + (a,)
                if not is_admissible(base, cand) and is_admissible(base, cand[1:]):
                    out.append(word_str(cand))
    return out


# ---------------------------------------------------------------------------
# labelled graphs


@dataclass(frozen=True)
class Edge:
    index: int
    origin: int
    dest: int
    label: int


@dataclass(frozen=True, eq=False)
class LabeledGraph:
    nodes: tuple[int, ...]
    edges: tuple[Edge, ...]
    alphabet: tuple = field(default=())

    def out_edges(self, node) -> list[Edge]:
        return [e for e in self.edges if e.origin == node]

    def follow(self, node, label) -> Edge | None:
        return self._follow.get((node, label))

    @property
    def _follow(self) -> dict:
        cache = self.__dict__.get("_follow_cache")
        if cache is None:
            cache = {}
            for e in self.edges:
                cache[(e.origin, e.label)] = e
            object.__setattr__(self, "_follow_cache", cache)
        return cache

    def is_right_resolving(self) -> bool:
        seen = set()
        for e in self.edges:
            if (e.origin, e.label) in seen:
                return False
            seen.add((e.origin, e.label))
        return True

    def is_irreducible(self) -> bool:
        g = nx.DiGraph()
        g.add_nodes_from(self.nodes)
        g.add_edges_from((e.origin, e.dest) for e in self.edges)
        return nx.is_strongly_connected(g)

    def adjacency(self) -> list[list[int]]:
        idx = {v: i for i, v in enumerate(self.nodes)}
        a = [[0] * len(self.nodes) for _ in self.nodes]
        for e in self.edges:
            a[idx[e.origin]][idx[e.dest]] += 1
        return a

    def paths(self, word) -> list[tuple[Edge, ...]]:
        """All edge paths whose label sequence is ``word``."""
        out = []
        for start in self.nodes:
            path = []
            v = start
            for a in word:
                e = self.follow(v, a)
                if e is None:
                    break
                path.append(e)
                v = e.dest
            else:
                out.append(tuple(path))
        return out

    def labels(self, path: Iterable[Edge]) -> tuple:
        return tuple(e.label for e in path)

    def subset_image(self, nodes: Iterable[int], label) -> frozenset:
        out = set()
        for v in nodes:
            e = self.follow(v, label)
            if e is not None:
                out.add(e.dest)
        return frozenset(out)

    def to_dot(self, name: str = "presentation") -> str:
        lines = [f"digraph {name} {{"]
        for v in self.nodes:
            lines.append(f'  "{v}";')
        for e in self.edges:
            lines.append(f'  "{e.origin}" -> "{e.dest}" [label="{e.label}"];')
        lines.append("}")
        return "\n".join(lines)

    def to_json(self) -> dict:
        return {
            "nodes": list(self.nodes),
            "edges": [{"id": e.index, "from": e.origin, "to": e.dest, "label": e.label} for e in self.edges],
        }


def graph_from_dfa(dfa: Dfa) -> LabeledGraph:
    edges = []
    for (q, a), r in sorted(dfa.transitions.items()):
        edges.append(Edge(len(edges), q, r, a))
    return LabeledGraph(tuple(dfa.states), tuple(edges), dfa.alphabet)


def _merge_followers(nodes: Sequence[int], trans: dict, alphabet: Sequence) -> dict:
    """Partition refinement: node -> class id, two nodes sharing a class iff same follower set."""
    block = {v: tuple(a for a in alphabet if (v, a) in trans) for v in nodes}
    while True:
        sig = {
            v: (block[v], tuple(block[trans[(v, a)]] if (v, a) in trans else None for a in alphabet))
            for v in nodes
        }
        ids: dict = {}
        new = {v: ids.setdefault(sig[v], len(ids)) for v in nodes}
        if len(set(new.values())) == len(set(block.values())):
            return new
        block = new


def presentation(base: BetaBase) -> LabeledGraph:
    """Minimal right-resolving presentation of the beta-shift.

    Start from the acceptor as a labelled graph, keep the strongly connected
    part containing the initial state, then merge nodes with equal follower
    sets.  Nodes are renumbered by their smallest original state.
    """
    dfa = base.dfa
    g = nx.DiGraph()
    g.add_nodes_from(dfa.states)
    g.add_edges_from((q, r) for (q, _a), r in dfa.transitions.items())
    core = next(c for c in nx.strongly_connected_components(g) if dfa.initial in c)
    trans = {(q, a): r for (q, a), r in dfa.transitions.items() if q in core and r in core}
    cls = _merge_followers(sorted(core), trans, dfa.alphabet)
    reps = {}
    for v in sorted(core):
        reps.setdefault(cls[v], v)
    order = sorted(reps.values())
    renum = {cls[v]: order.index(reps[cls[v]]) for v in core}
    merged = {}
    for (q, a), r in trans.items():
        merged[(renum[cls[q]], a)] = renum[cls[r]]
    edges = tuple(Edge(i, q, r, a) for i, ((q, a), r) in enumerate(sorted(merged.items())))
    graph = LabeledGraph(tuple(range(len(order))), edges, dfa.alphabet)
    if not graph.is_right_resolving() or not graph.is_irreducible():
        raise InvariantViolation("presentation lost right-resolving or irreducible structure")
    # every node must carry a distinct follower set
    if len(set(_merge_followers(graph.nodes, merged, dfa.alphabet).values())) != len(graph.nodes):
        raise InvariantViolation("presentation is not follower-separated")
    return graph


def synchronizing_word(graph: LabeledGraph) -> tuple[tuple, int]:
    """Shortest word (ties broken by smaller labels) driving every node into one node."""
    start = frozenset(graph.nodes)
    if len(start) == 1:
        return (), next(iter(start))
    seen = {start: ()}
    queue = deque([start])
    while queue:
        s = queue.popleft()
        for a in graph.alphabet:
            t = graph.subset_image(s, a)
            if not t or t in seen:
                continue
            word = seen[s] + (a,)
            if len(t) == 1:
                return word, next(iter(t))
            seen[t] = word
            queue.append(t)
    raise NoSynchronizingWord("no synchronizing word exists")


def synchronizes_to(graph: LabeledGraph, word) -> int | None:
    """Node reached by ``word`` from every node where it can be read, or None."""
    targets = set()
    for path in graph.paths(tuple(word)):
        targets.add(path[-1].dest if path else None)
    if len(targets) == 1:
        t = targets.pop()
        return t
    return None


@dataclass(frozen=True)
class ErgodicClass:
    states: frozenset
    ergodic: bool


def ergodic_classes(dfa: Dfa) -> list[ErgodicClass]:
    """Mutual-reachability classes of accepting states, with minimal ones marked ergodic."""
    g = nx.DiGraph()
    g.add_nodes_from(dfa.accepting)
    for (q, _a), r in dfa.transitions.items():
        if q in dfa.accepting and r in dfa.accepting:
            g.add_edge(q, r)
    comps = [frozenset(c) for c in nx.strongly_connected_components(g)]
    where = {q: i for i, c in enumerate(comps) for q in c}
    leaves = set(range(len(comps)))
    for u, v in g.edges:
        if where[u] != where[v]:
            leaves.discard(where[u])
    out = [ErgodicClass(c, i in leaves) for i, c in enumerate(comps)]
    out.sort(key=lambda c: sorted(map(str, c.states)))
    return out


def dump_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2)
