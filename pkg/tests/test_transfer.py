from __future__ import annotations

import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from betashift.algebraic import approx, sign
from betashift.beta_expansion import value
from betashift.errors import NoSavingsProperty, NotAdmissible
from betashift.martingales import check_fairness, constant_martingale, construct_case1, evaluate, savings_transform
from betashift.measures import density_bounds, parry_markov, parry_measure
from betashift.shift_automaton import admissible_words, admissible_words_upto, next_word, successors
from betashift.transfer import BinaryMartingale, InducedMeasure, density_cdf, difference_quotients

from conftest import GOLDEN, base


def golden_savings():
    g = base(GOLDEN)
    return g, savings_transform(construct_case1(parry_markov(g, 1), (0,), 1, Fraction(1, 2)))


@pytest.fixture(scope="module")
def unit_golden():
    g = base(GOLDEN)
    return InducedMeasure(constant_martingale(g.dfa), g)


@pytest.fixture(scope="module")
def savings_golden():
    g, m = golden_savings()
    return InducedMeasure(m, g)


# -- cylinder masses ------------------------------------------------------------------


def test_unit_strategy_gives_parry(unit_golden):
    g = unit_golden.base
    pm = parry_measure(g)
    for w in admissible_words_upto(g, 8):
        assert unit_golden.mu(w) == pm.cylinder(w)


def test_binary_unit_is_lebesgue(two):
    ind = InducedMeasure(constant_martingale(two.dfa), two)
    for w in admissible_words(two, 5):
        assert ind.mu(w) == Fraction(1, 32)
        assert ind.cdf_beta_adic(w) == value(two, w)


def test_case1_target_mass():
    g = base(GOLDEN)
    m = construct_case1(parry_markov(g, 1), (0,), 1, Fraction(1, 2))
    ind = InducedMeasure(m, g, savings_constant=None)
    pm = parry_measure(g)
    assert ind.mu((0, 1)) == Fraction(3, 2) * evaluate(m, (0,)) * pm.cylinder((0, 1))


def test_mu_additive(savings_golden):
    g = savings_golden.base
    for w in admissible_words_upto(g, 10):
        kids = [w + (a,) for a in successors(g, w)]
        assert sum((savings_golden.mu(c) for c in kids), g.field.zero) == savings_golden.mu(w)


def test_mu_rejects_inadmissible(unit_golden):
    with pytest.raises(NotAdmissible):
        unit_golden.mu("11")


# -- distribution function on the beta-adic grid ----------------------------------------


def test_cdf_examples(unit_golden):
    g = unit_golden.base
    assert unit_golden.cdf_beta_adic(()) == 0
    assert unit_golden.cdf_beta_adic("1") == parry_measure(g).cylinder("0")


def test_cdf_matches_density_integral(unit_golden):
    g = unit_golden.base
    for w in admissible_words_upto(g, 9):
        assert unit_golden.cdf_beta_adic(w) == density_cdf(g, value(g, w))


@pytest.mark.parametrize("which", ["unit", "savings"])
def test_cdf_monotone_on_grid(which, unit_golden, savings_golden):
    ind = unit_golden if which == "unit" else savings_golden
    g = ind.base
    for n in range(1, 11):
        for w in admissible_words(g, n):
            nxt = next_word(g, w)
            hi = ind.total_mass if not nxt else ind.cdf_beta_adic(nxt)
            assert sign(hi - ind.cdf_beta_adic(w)) >= 0
            # the step is exactly the cylinder mass
            assert hi - ind.cdf_beta_adic(w) == ind.mu(w)


def test_cdf_enclosure_brackets_truth(unit_golden):
    g = unit_golden.base
    for x in (Fraction(1, 3), Fraction(1, 2), Fraction(5, 7), Fraction(0), Fraction(1)):
        lo, hi = unit_golden.cdf_enclosure(x, 30)
        truth = density_cdf(g, x)
        assert sign(truth - lo) >= 0 and sign(hi - truth) >= 0


# -- dyadic evaluation ----------------------------------------------------------------------


def test_cdf_dyadic_endpoints(savings_golden):
    assert savings_golden.cdf_dyadic(0, 10) == (0, 0)
    v, r = savings_golden.cdf_dyadic(1, 10)
    assert abs(v - approx(savings_golden.total_mass, 80)) <= r <= Fraction(1, 2**10)


@pytest.mark.parametrize("i", [8, 16, 24])
def test_unit_cdf_at_half(unit_golden, i):
    v, r = unit_golden.cdf_dyadic(Fraction(1, 2), i)
    truth = approx(density_cdf(unit_golden.base, Fraction(1, 2)), 100)
    assert r <= Fraction(1, 2**i)
    assert abs(v - truth) <= r


def test_cdf_dyadic_rejects_non_dyadic(unit_golden):
    from betashift.errors import InputError

    with pytest.raises(InputError):
        unit_golden.cdf_dyadic(Fraction(1, 3), 5)


def test_needs_savings_property():
    g = base(GOLDEN)
    ind = InducedMeasure(construct_case1(parry_markov(g, 1), (0,), 1, Fraction(1, 2)), g)
    with pytest.raises(NoSavingsProperty):
        ind.cdf_dyadic(Fraction(1, 2), 5)


def test_precision_schedule(savings_golden):
    lc = savings_golden.lipschitz()
    prev = 0
    for i in (1, 5, 10, 20, 30):
        v = savings_golden.dyadic_precision(i)
        assert v >= i + 2 and v >= prev
        assert lc.modulus_dyadic(v) <= Fraction(1, 2 ** (i + 1))
        prev = v


def test_lipschitz_constants_unit(unit_golden):
    lc = unit_golden.lipschitz()
    lo, hi = density_bounds(unit_golden.base)
    assert lc.k_upper >= approx(hi, 60) and lc.k_lower <= approx(lo, 60)
    assert lc.linear_rate == 0 and lc.offset >= 1


# -- binary strategy -----------------------------------------------------------------------


def test_binary_identity_transfer(two):
    bm = BinaryMartingale(InducedMeasure(constant_martingale(two.dfa), two))
    for n in range(0, 6):
        for bits in admissible_words(two, n):
            v, r = bm(bits, 12)
            assert r <= Fraction(1, 2**12)
            assert abs(v - 1) <= r


def test_binary_fairness_shallow(savings_golden):
    bm = BinaryMartingale(savings_golden)
    i = 20
    tol = 3 * Fraction(1, 2**i)
    for n in range(0, 6):
        for tau in admissible_words(base("x-2"), n):
            v, _ = bm(tau, i)
            v0, _ = bm(tau + (0,), i)
            v1, _ = bm(tau + (1,), i)
            assert abs(v - (v0 + v1) / 2) <= tol
            assert v >= -Fraction(2, 2**i)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(0, 1), max_size=10), st.integers(4, 24))
def test_binary_values_nonnegative(tau, i):
    g, m = golden_savings()
    bm = BinaryMartingale(InducedMeasure(m, g))
    v, r = bm(tau, i)
    assert r <= Fraction(1, 2**i)
    assert v >= -Fraction(2, 2**i)


# -- difference quotients ---------------------------------------------------------------------


def test_unit_quotients_sit_between_density_bounds(unit_golden):
    lo, hi = (float(x) for x in density_bounds(unit_golden.base))
    for q in difference_quotients(unit_golden, Fraction(1, 3), range(2, 14), digits=60):
        assert lo - 1e-9 <= q["lower"] <= q["upper"] <= hi + 1e-9


def test_quotients_grow_where_strategy_wins():
    g = base(GOLDEN)
    m = savings_transform(construct_case1(parry_markov(g, 1), (0, 0), 1, Fraction(1, 2)))
    ind = InducedMeasure(m, g)
    qs = difference_quotients(ind, Fraction(1, 2), range(8, 25), digits=80)
    first = min(q["lower"] for q in qs if q["j"] == 8)
    last = min(q["lower"] for q in qs if q["j"] == 24)
    assert last > 2 * first


def test_pairs_respect_almost_lipschitz_bound(savings_golden):
    import math

    g = savings_golden.base
    k = float(savings_golden.lipschitz().k_log)
    rng = random.Random(4)
    words = admissible_words(g, 12)
    for _ in range(300):
        x, y = sorted(rng.sample(words, 2))
        h = float(value(g, y) - value(g, x))
        if h > 1 / math.e:
            continue
        gap = float(savings_golden.cdf_beta_adic(y) - savings_golden.cdf_beta_adic(x))
        assert gap <= -k * h * math.log(h) * (1 + 1e-9)


def test_fairness_of_savings_against_parry(savings_golden):
    assert check_fairness(savings_golden.mart, parry_measure(savings_golden.base), 8).ok
