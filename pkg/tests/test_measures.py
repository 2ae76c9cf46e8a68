from __future__ import annotations

from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from betashift.beta_expansion import value
from betashift.errors import NotAdmissible, NotIrreducible
from betashift.measures import (
    MarkovMeasure,
    density_bounds,
    edge_measure,
    freq_profile,
    markov_from_measure,
    markov_order,
    occ,
    parry_cylinder,
    parry_density,
    parry_markov,
    parry_measure,
    parry_via_edges,
    sample,
    sample_parry,
    symbol_state_chain,
    xi,
    xi_conditional_values,
    xi_oracle,
)
from betashift.shift_automaton import admissible_words, admissible_words_upto, successors

from conftest import GOLDEN, PLASTIC, SOFIC, TRIBONACCI, base

BASES = [GOLDEN, TRIBONACCI, PLASTIC, SOFIC, "x^2-2x-1", "x-2"]


def short_words(b, binary_len, other_len):
    return admissible_words_upto(b, binary_len if b.alphabet_size == 2 else other_len)


# -- generic Markov measures ----------------------------------------------------------


def test_uniform_cylinder():
    assert MarkovMeasure.uniform().cylinder("0110") == Fraction(1, 16)
    assert MarkovMeasure.uniform().cylinder((0, 1, 1, 0)) == Fraction(1, 16)


def test_alternating_chain():
    m = MarkovMeasure.from_matrix((0, 1), [[0, 1], [1, 0]])
    assert m.stationary() == {(0,): Fraction(1, 2), (1,): Fraction(1, 2)}
    assert sample(m, 8, seed=1, start=(0,)) == (0, 1, 0, 1, 0, 1, 0, 1)


def test_reducible_chain_rejected():
    m = MarkovMeasure.from_matrix((0, 1), [[1, 0], [0, 1]], init={0: Fraction(1, 2), 1: Fraction(1, 2)})
    assert not m.is_irreducible()
    with pytest.raises(NotIrreducible):
        m.stationary()


def test_golden_symbol_chain_stationary(golden):
    phi = golden.beta
    m = parry_markov(golden, 1)
    pi = m.stationary()
    assert pi[(0,)] == phi * phi / (phi * phi + 1)
    assert pi[(1,)] == 1 / (phi * phi + 1)
    assert abs(float(pi[(0,)]) - 0.7236) < 1e-4


def test_golden_edge_chain_node_masses(golden):
    chain = edge_measure(golden)
    pi = chain.stationary()
    g = golden.graph
    node = {v: golden.field.zero for v in g.nodes}
    for e in g.edges:
        node[e.origin] = node[e.origin] + pi[(e.index,)]
    phi = golden.beta
    assert node[0] == phi * phi / (phi * phi + 1)
    assert node[1] == 1 / (phi * phi + 1)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(1, 20), min_size=4, max_size=4))
def test_stationary_is_fixed_point(weights):
    a, b, c, d = weights
    m = MarkovMeasure.from_matrix((0, 1), [[Fraction(a, a + b), Fraction(b, a + b)], [Fraction(c, c + d), Fraction(d, c + d)]])
    pi = m.stationary()
    for t in ((0,), (1,)):
        assert sum(pi[(s,)] * m.block_transition((s,), t) for s in (0, 1)) == pi[t]
    assert m.is_invariant()


def test_two_step_measure_blocks(tribonacci):
    m = parry_markov(tribonacci, 2)
    assert (1, 1) in m.blocks
    assert m.is_invariant() and m.is_irreducible()
    one = m.induced_one_step()
    assert one.order == 1
    pi = one.stationary()
    assert sum(pi.values(), tribonacci.field.zero) == 1


def test_markov_order():
    assert markov_order(base(GOLDEN)) == 1
    assert markov_order(base(TRIBONACCI)) == 2
    assert markov_order(base(SOFIC)) is None


@pytest.mark.parametrize("poly", [GOLDEN, TRIBONACCI])
def test_parry_is_markov_of_the_shift_memory(poly):
    b = base(poly)
    k = markov_order(b)
    m = parry_markov(b, k)
    pm = parry_measure(b)
    for w in admissible_words_upto(b, 8):
        assert m.cylinder(w) == pm.cylinder(w)


# -- cylinder lengths --------------------------------------------------------------


def test_xi_examples(golden, two):
    phi = golden.beta
    assert xi(golden, "00") == 2 - phi
    assert xi(golden, "10") == 2 - phi
    assert xi(golden, "10") == 1 - 1 / phi
    for w in admissible_words(two, 5):
        assert xi(two, w) == Fraction(1, 32)


def test_xi_rejects_inadmissible(golden):
    with pytest.raises(NotAdmissible):
        xi(golden, "11")


@pytest.mark.parametrize("poly", BASES)
def test_xi_closed_form_matches_interval_oracle(poly):
    b = base(poly)
    for w in short_words(b, 12, 7):
        assert xi(b, w) == xi_oracle(b, w)


@pytest.mark.parametrize("poly", BASES)
def test_xi_additive_and_bounded(poly):
    b = base(poly)
    for w in short_words(b, 10, 6):
        x = xi(b, w)
        assert sum((xi(b, w + (a,)) for a in successors(b, w)), b.field.zero) == x
        assert (b.inv_power(len(w)) - x).sign() >= 0


@pytest.mark.parametrize("poly", BASES)
def test_xi_matches_numeric_interval(poly):
    """Length of the set of reals whose greedy digits start with sigma, found by bisection."""
    b = base(poly)
    mpmath.mp.dps = 40
    beta = mpmath.mpf(b.beta.approx(140).numerator) / b.beta.approx(140).denominator

    def digits(x, n):
        out = []
        for _ in range(n):
            x *= beta
            d = int(mpmath.floor(x))
            out.append(d)
            x -= d
        return tuple(out)

    for w in short_words(b, 5, 3):
        left = mpmath.mpf(value(b, w).approx(140).numerator) / value(b, w).approx(140).denominator
        # right end: smallest x above left whose digits no longer start with w
        lo, hi = left, mpmath.mpf(1)
        if digits(hi - mpmath.mpf(10) ** -30, len(w)) == w:
            right = hi
        else:
            for _ in range(110):
                mid = (lo + hi) / 2
                if digits(mid, len(w)) == w:
                    lo = mid
                else:
                    hi = mid
            right = hi
        assert abs((right - left) - float(xi(b, w))) < 1e-12


@pytest.mark.parametrize("poly", BASES)
def test_conditional_ratio_set_is_small(poly):
    b = base(poly)
    ratios = xi_conditional_values(b)
    assert len(ratios) <= b.m + b.n + 2
    assert all(r.sign() > 0 and (1 - r).sign() >= 0 for r in ratios)
    seen = set()
    for w in short_words(b, 10, 6):
        if w:
            seen.add(xi(b, w) / xi(b, w[:-1]))
    assert seen <= set(ratios)


# -- the Parry measure -------------------------------------------------------------


def test_parry_binary_is_lebesgue(two):
    for w in admissible_words(two, 6):
        assert parry_cylinder(two, w) == Fraction(1, 64)
        assert parry_via_edges(two, w) == Fraction(1, 64)


def test_parry_golden_letters(golden):
    phi = golden.beta
    p0 = phi * phi / (phi * phi + 1)
    assert parry_cylinder(golden, "0") == p0 == parry_via_edges(golden, "0")
    assert parry_cylinder(golden, "1") == 1 - p0 == parry_via_edges(golden, "1")
    assert abs(float(parry_cylinder(golden, "1")) - 0.2764) < 1e-4


@pytest.mark.parametrize("poly", BASES)
def test_parry_three_routes_agree(poly):
    b = base(poly)
    chain = edge_measure(b)
    pm = parry_measure(b)
    for w in short_words(b, 10, 6):
        p = parry_cylinder(b, w)
        assert p == parry_via_edges(b, w, chain)
        assert p == pm.cylinder(w)


@pytest.mark.parametrize("poly", BASES)
def test_parry_additive_and_invariant(poly):
    b = base(poly)
    pm = parry_measure(b)
    for w in short_words(b, 8, 5):
        p = pm.cylinder(w)
        assert sum((pm.cylinder(w + (a,)) for a in b.alphabet), b.field.zero) == p
        assert sum((pm.cylinder((a,) + w) for a in b.alphabet), b.field.zero) == p


@pytest.mark.parametrize("poly", BASES)
def test_density_integrates_to_one(poly):
    b = base(poly)
    assert parry_density(b).cdf(b.field.one) == 1


@pytest.mark.parametrize("poly", BASES)
def test_parry_between_density_bounds_times_length(poly):
    b = base(poly)
    lo, hi = density_bounds(b)
    assert lo.sign() > 0
    for w in short_words(b, 10, 6):
        p, x = parry_cylinder(b, w), xi(b, w)
        assert (p - lo * x).sign() >= 0
        assert (hi * x - p).sign() >= 0


def test_golden_density_bounds(golden):
    lo, hi = density_bounds(golden)
    assert abs(float(lo) - 0.7236) < 1e-4 and abs(float(hi) - 1.1708) < 1e-4


def test_markov_from_measure_roundtrip(golden):
    pm = parry_measure(golden)
    m = markov_from_measure(pm, 1)
    assert m.cylinder("0") == pm.cylinder("0")


# -- occurrences and profiles ------------------------------------------------------------


def test_occ_examples():
    assert occ("11", "1111") == 3
    assert occ("010", "01010") == 2
    assert occ("2", "01") == 0


def test_profile_of_periodic_word(golden):
    s = (0, 1, 0) * 10_000
    prof = freq_profile(s, 1, parry_measure(golden), golden)
    zero = next(x for x in prof.blocks if x.word == (0,))
    assert zero.ratio == Fraction(2, 3)
    assert abs(zero.deviation - 0.057) < 1e-3
    js = prof.to_json()
    assert js["N"] == 30_000 and js["blocks"][0]["word"] == "0"


@given(st.lists(st.integers(0, 1), max_size=60), st.integers(1, 3))
def test_profile_counts_match_occ(s, k):
    prof = freq_profile(s, k)
    for blk in prof.blocks:
        assert blk.count == occ(blk.word, s)


# -- sampling ---------------------------------------------------------------------


def test_uniform_sample_frequency():
    s = sample(MarkovMeasure.uniform(), 100_000, seed=7)
    assert abs(s.count(0) / len(s) - 0.5) < 0.01


def test_golden_parry_sample_support(golden):
    s = sample_parry(golden, 100_000, seed=3)
    assert occ((1, 1), s) == 0
    p0 = float(parry_cylinder(golden, "0"))
    assert abs(s.count(0) / len(s) - p0) < 0.01


def test_sampling_is_reproducible(golden):
    assert sample_parry(golden, 500, seed=5) == sample_parry(golden, 500, seed=5)
    assert sample_parry(golden, 500, seed=5) != sample_parry(golden, 500, seed=6)


# -- the symbol x state chain ------------------------------------------------------


def test_chain_distribution_sums_to_one(golden):
    chain = symbol_state_chain(golden.dfa, parry_markov(golden, 1))
    assert sum(chain.stationary.values(), golden.field.zero) == 1
    assert chain.growth_exponent({}) == 0


def test_constant_table_has_zero_exponent(tribonacci):
    chain = symbol_state_chain(tribonacci.dfa, parry_markov(tribonacci, 2))
    assert sum(chain.stationary.values(), tribonacci.field.zero) == 1
    assert chain.growth_exponent({(q, a): 1 for q in tribonacci.dfa.states for a in (0, 1)}) == 0


def _counter_dfa(size):
    """States count ones modulo ``size``."""
    trans = {(q, a): (q + a) % size for q in range(size) for a in (0, 1)}
    from betashift.shift_automaton import Dfa

    return Dfa(tuple(range(size)), (0, 1), trans, 0)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 4), st.lists(st.fractions(min_value=-1, max_value=1, max_denominator=20), min_size=4, max_size=4))
def test_fair_tables_do_not_grow_on_uniform(size, tilts):
    dfa = _counter_dfa(size)
    uni = MarkovMeasure.uniform()
    chain = symbol_state_chain(dfa, uni)
    table = {}
    for q in range(size):
        t = tilts[q] * Fraction(9, 10)
        table[(q, 0)], table[(q, 1)] = 1 + t, 1 - t
    g = chain.growth_exponent(table)
    if chain.is_state_constant(table):
        assert g == 0
    else:
        assert g < 0


@settings(max_examples=40, deadline=None)
@given(st.lists(st.fractions(min_value=-1, max_value=1, max_denominator=20), min_size=2, max_size=2))
def test_fair_tables_do_not_grow_on_golden_parry(tilts):
    b = base(GOLDEN)
    m = parry_markov(b, 1)
    dfa = m.support_dfa()
    chain = symbol_state_chain(dfa, m)
    table = {}
    for q, t in zip(dfa.states, tilts + tilts):
        row = m.predictor().probs() if q == () else m.cond[q]
        if len(row) < 2:
            continue
        p0, p1 = row[0], row[1]
        # smallest conditional keeps the factors nonnegative
        s = t * min(p0, p1) * Fraction(9, 10)
        table[(q, 0)] = 1 + s / p0
        table[(q, 1)] = 1 - s / p1
    g = chain.growth_exponent(table)
    assert g <= 1e-12
    if not chain.is_state_constant(table):
        assert g < 0
