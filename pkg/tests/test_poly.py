import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ccmpc.poly import (
    Polynomial, PolynomialParseError, grevlex_rank, monomial_basis, parse_polynomial,
)
from oracles import grevlex_listing

X = ["x1", "x2"]


def rand_poly(rng, n, deg, nterms=6, scale=10.0):
    terms = {}
    for _ in range(nterms):
        a = rng.multinomial(int(rng.integers(0, deg + 1)), np.ones(n) / n)
        terms[tuple(a)] = rng.uniform(-scale, scale)
    return Polynomial(terms, n)


# grevlex ---------------------------------------------------------------------

def test_rank_examples():
    assert grevlex_rank([0, 0], 2) == 1
    assert grevlex_rank([1, 1], 2) == 5
    assert grevlex_rank([0, 2], 2) == 6


def test_basis_layout_two_vars():
    assert monomial_basis(2, 2) == [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]


@pytest.mark.parametrize("n,d", [(1, 5), (2, 4), (3, 4), (4, 3), (5, 2)])
def test_basis_matches_comparator_oracle(n, d):
    assert monomial_basis(n, d) == grevlex_listing(n, d)


def test_basis_sizes():
    assert len(monomial_basis(7, 5)) == 792
    for n in range(1, 7):
        for d in range(0, 9):
            assert len(monomial_basis(n, d)) == math.comb(n + d, n)


@pytest.mark.parametrize("n,d", [(1, 6), (2, 6), (3, 5), (4, 4)])
def test_rank_inverts_basis(n, d):
    basis = monomial_basis(n, d)
    ranks = [grevlex_rank(a, n) for a in basis]
    assert ranks == list(range(1, len(basis) + 1))


def test_rank_dimension_mismatch():
    with pytest.raises(ValueError):
        grevlex_rank([1, 0, 0], 2)
    with pytest.raises(ValueError):
        monomial_basis(0, 2)


# evaluation, arithmetic -------------------------------------------------------

def test_evaluate_examples():
    p = parse_polynomial("x1^2 + x2^2 - 0.04", X)
    assert p.evaluate([1, 1]) == pytest.approx(1.96, abs=1e-15)
    assert p.evaluate([0.2, 0]) == pytest.approx(0.0, abs=1e-15)
    q = 2 * Polynomial.variable(0, 2) - 3 * Polynomial.variable(1, 2) ** 2
    assert q.evaluate([1, 1]) == -1.0
    with pytest.raises(ValueError):
        p.evaluate([1, 1, 1])


def test_multiply_add_examples():
    x1, x2 = Polynomial.variable(0, 2), Polynomial.variable(1, 2)
    assert x1 * x2 == Polynomial({(1, 1): 1.0}, 2)
    assert (x1 + 1) + (-x1) == Polynomial.constant(1.0, 2)
    assert ((x1 + 1) + (-x1)).terms == {(0, 0): 1.0}
    with pytest.raises(ValueError):
        x1 * Polynomial.variable(0, 3)


def test_multiply_matches_pointwise_product(rng):
    for _ in range(50):
        n = int(rng.integers(1, 4))
        p, q = rand_poly(rng, n, 3), rand_poly(rng, n, 3)
        pq = p * q
        pts = rng.uniform(-1.5, 1.5, (20, n))
        ref = p.evaluate(pts) * q.evaluate(pts)
        np.testing.assert_allclose(pq.evaluate(pts), ref, rtol=1e-10, atol=1e-10)


def test_degree_of_product(rng):
    for _ in range(20):
        p, q = rand_poly(rng, 2, 3), rand_poly(rng, 2, 3)
        if not p.is_zero and not q.is_zero:
            assert (p * q).degree == p.degree + q.degree


def test_commutative_associative(rng):
    # integer coefficients keep the comparison exact
    for _ in range(20):
        p, q, s = (Polynomial({k: round(v) for k, v in rand_poly(rng, 3, 3).terms.items()}, 3)
                   for _ in range(3))
        assert p + q == q + p
        assert p * q == q * p
        assert (p + q) + s == p + (q + s)
        assert (p * q) * s == p * (q * s)


def test_zero_threshold_drops_tiny_terms():
    p = Polynomial({(1,): 1e-15, (0,): 1.0}, 1)
    assert p.terms == {(0,): 1.0}


# substitution -------------------------------------------------------------------

def test_substitute_examples():
    # variables (u, w)
    u, w = Polynomial.variable(0, 2), Polynomial.variable(1, 2)
    x1x2 = Polynomial({(1, 1): 1.0}, 2)
    assert x1x2.substitute([Polynomial.constant(1.0, 2), w + u]) == w + u
    x2sq = Polynomial({(0, 2): 1.0}, 2)
    assert x2sq.substitute([u, u + w]).allclose(u ** 2 + 2 * u * w + w ** 2)
    with pytest.raises(ValueError):
        x1x2.substitute([u])


def test_substitute_commutes_with_evaluation(rng):
    for _ in range(30):
        n, m = int(rng.integers(1, 4)), int(rng.integers(1, 4))
        p = rand_poly(rng, n, 4)
        sigma = [rand_poly(rng, m, 2, nterms=3, scale=2.0) for _ in range(n)]
        t = rng.uniform(-1, 1, m)
        inner = [s.evaluate(t) for s in sigma]
        assert p.substitute(sigma).evaluate(t) == pytest.approx(p.evaluate(inner), rel=1e-9, abs=1e-9)


# text form --------------------------------------------------------------------

def test_parse_and_print_round_trip():
    p = parse_polynomial("2*x1^2*x2 - 0.04", X)
    assert p == Polynomial({(2, 1): 2.0, (0, 0): -0.04}, 2)
    assert parse_polynomial(p.to_string(X), X) == p
    assert parse_polynomial(" x1 * x2+w1 ", ["x1", "x2", "w1"]).terms == {(1, 1, 0): 1.0, (0, 0, 1): 1.0}


@pytest.mark.parametrize("bad", ["x1 +", "x3", "x1^-1", "x1^0.5", "import os", "x1 / x2", ""])
def test_parse_errors(bad):
    with pytest.raises(PolynomialParseError):
        parse_polynomial(bad, X)


@settings(max_examples=60, deadline=None)
@given(st.dictionaries(st.tuples(st.integers(0, 3), st.integers(0, 3)),
                       st.integers(-9, 9), max_size=6))
def test_text_round_trip_property(terms):
    p = Polynomial(terms, 2)
    assert parse_polynomial(p.to_string(X), X) == p
