import numpy as np
import pytest

from ccmpc.moments import (
    DisturbanceSpec, MomentSequence, delta_moments, empirical_moments, linear_functional,
    localizing_matrix, moment_matrix, product_moments, representing_measure_check,
    uniform_moments,
)
from ccmpc.poly import Polynomial, basis_index, monomial_basis, parse_polynomial
from oracles import gauss_uniform, quad_moment_2d


def test_uniform_moments_closed_form():
    np.testing.assert_allclose(uniform_moments(-0.5, 0.5, 4).values, [1, 0, 1 / 12, 0, 1 / 80], atol=1e-16)
    np.testing.assert_allclose(uniform_moments(0, 1, 2).values, [1, 0.5, 1 / 3])
    np.testing.assert_allclose(uniform_moments(-1, 1, 2).values, [1, 0, 1 / 3])
    with pytest.raises(ValueError):
        uniform_moments(1, 1, 2)


def test_uniform_moments_match_quadrature():
    x, w = gauss_uniform(-0.3, 0.7)
    ref = [np.sum(w * x ** j) for j in range(9)]
    np.testing.assert_allclose(uniform_moments(-0.3, 0.7, 8).values, ref, rtol=1e-13, atol=1e-15)


def test_delta_moments():
    np.testing.assert_array_equal(delta_moments([0.0], 2).values, [1, 0, 0])
    np.testing.assert_allclose(delta_moments([0.3], 2).values, [1, 0.3, 0.09])
    np.testing.assert_array_equal(delta_moments([1, 1], 2).values, np.ones(6))


def test_linear_functional():
    u = Polynomial.variable(0, 1)
    assert linear_functional(delta_moments([0.3], 2), u) == pytest.approx(0.3)
    assert linear_functional(MomentSequence(1, 2, [1, 0.1, 0.2]), Polynomial.constant(1, 1)) == 1
    assert linear_functional(uniform_moments(-0.5, 0.5, 2), u ** 2) == pytest.approx(1 / 12)
    with pytest.raises(ValueError, match="order 3"):
        linear_functional(uniform_moments(-0.5, 0.5, 2), u ** 3)


def test_product_moments():
    y = product_moments([delta_moments([0.3], 4), uniform_moments(-0.5, 0.5, 4)])
    assert y.mass == 1.0
    assert y[(1, 2)] == pytest.approx(0.025, abs=1e-15)
    rules = (gauss_uniform(0.2, 0.4), gauss_uniform(-0.5, 0.5))
    for a in monomial_basis(2, 4):
        assert product_moments([uniform_moments(0.2, 0.4, 4), uniform_moments(-0.5, 0.5, 4)])[a] \
            == pytest.approx(quad_moment_2d(a, rules), rel=1e-12, abs=1e-15)
    zero = MomentSequence(1, 4, np.zeros(5))
    assert not np.any(product_moments([zero, uniform_moments(-1, 1, 4)]).values)
    with pytest.raises(ValueError):
        product_moments([uniform_moments(-1, 1, 2), uniform_moments(-1, 1, 3)])


def test_product_factorization_spot_checks(rng):
    for _ in range(5):
        a = empirical_moments(rng.uniform(-1, 1, (5, 2)), 4)
        b = empirical_moments(rng.uniform(-1, 1, (4, 1)), 4)
        y = product_moments([a, b])
        basis = monomial_basis(3, 4)
        for k in rng.choice(len(basis), 50):
            al = basis[k]
            assert y[al] == a[al[:2]] * b[al[2:]]


def test_moment_matrix_layout():
    y = MomentSequence(2, 4, np.arange(15, dtype=float))
    M = moment_matrix(y, 2)
    idx = basis_index(2, 4)
    assert M[1, 2] == y.values[idx[(1, 1)]]
    np.testing.assert_array_equal(moment_matrix(delta_moments([1, 1], 4), 2), np.ones((6, 6)))
    np.testing.assert_allclose(moment_matrix(uniform_moments(-0.5, 0.5, 2), 1), [[1, 0], [0, 1 / 12]])
    with pytest.raises(ValueError):
        moment_matrix(uniform_moments(-1, 1, 3), 2)


def test_moment_matrix_exactly_symmetric(rng):
    for _ in range(10):
        n = int(rng.integers(1, 4))
        y = MomentSequence(n, 4, rng.normal(size=len(monomial_basis(n, 4))))
        M = moment_matrix(y, 2)
        assert np.array_equal(M, M.T)


def test_localizing_matrix_examples():
    y = MomentSequence(2, 4, np.linspace(0.1, 1.5, 15))
    b, c = 2.0, 3.0
    p = b * Polynomial.variable(0, 2) - c * Polynomial.variable(1, 2) ** 2
    L = localizing_matrix(y, p, 1)
    assert L[0, 0] == pytest.approx(b * y[(1, 0)] - c * y[(0, 2)])
    np.testing.assert_array_equal(localizing_matrix(y, Polynomial.constant(1.0, 2), 2), moment_matrix(y, 2))
    t = np.array([0.4, -0.7])
    B = np.array([np.prod(t ** np.array(a)) for a in monomial_basis(2, 1)])
    np.testing.assert_allclose(localizing_matrix(delta_moments(t, 4), p, 1), p.evaluate(t) * np.outer(B, B),
                               atol=1e-14)


def test_localizing_linear_in_p(rng):
    y = MomentSequence(2, 6, rng.normal(size=28))
    for _ in range(10):
        p = Polynomial({tuple(rng.integers(0, 2, 2)): rng.normal() for _ in range(3)}, 2)
        q = Polynomial({tuple(rng.integers(0, 3, 2)): rng.normal() for _ in range(3)}, 2)
        np.testing.assert_allclose(localizing_matrix(y, p + q, 1),
                                   localizing_matrix(y, p, 1) + localizing_matrix(y, q, 1), atol=1e-12)


def test_quadratic_form_identity(rng):
    for _ in range(20):
        n, r = int(rng.integers(1, 4)), int(rng.integers(1, 3))
        y = empirical_moments(rng.uniform(-1, 1, (7, n)), 2 * r)
        basis = monomial_basis(n, r)
        coef = rng.normal(size=len(basis))
        p = Polynomial(dict(zip(basis, coef)), n)
        assert linear_functional(y, p * p) == pytest.approx(coef @ moment_matrix(y, r) @ coef, rel=1e-9, abs=1e-9)


def test_psd_of_measures(rng):
    for _ in range(200):
        n, r = int(rng.integers(1, 4)), int(rng.integers(1, 4))
        if rng.random() < 0.5:
            y = delta_moments(rng.uniform(-1, 1, n), 2 * r)
            sv = np.linalg.svd(moment_matrix(y, r), compute_uv=False)
            assert sv[1] < 1e-9 * sv[0]
        else:
            y = empirical_moments(rng.uniform(-1, 1, (int(rng.integers(1, 30)), n)), 2 * r)
        assert np.linalg.eigvalsh(moment_matrix(y, r))[0] >= -1e-9


def test_representing_measure_check():
    box = [1 - Polynomial.variable(0, 2) ** 2, 1 - Polynomial.variable(1, 2) ** 2]
    ok, ev = representing_measure_check(delta_moments([0.2, -0.5], 6), box, 3)
    assert ok and set(ev) == {"moment", "localizing[0]", "localizing[1]"}
    w = Polynomial.variable(0, 1)
    assert representing_measure_check(uniform_moments(-0.5, 0.5, 6), [0.25 - w ** 2], 3)[0]
    bad = MomentSequence(1, 2, [1.0, 0.0, -1.0])
    ok, ev = representing_measure_check(bad, [], 1)
    assert not ok and ev["moment"] < 0
    # outside the support: the localizer catches it
    assert not representing_measure_check(delta_moments([0.9], 6), [0.25 - w ** 2], 3)[0]


def test_json_round_trip():
    y = uniform_moments(-0.5, 0.5, 6)
    z = MomentSequence.from_json(y.to_json())
    assert (z.num_vars, z.max_degree) == (1, 6)
    np.testing.assert_array_equal(z.values, y.values)


def test_disturbance_spec():
    d = DisturbanceSpec("uniform", [[-0.5, 0.5]])
    s = d.sample(np.random.default_rng(0), 10_000)
    assert s.shape == (10_000, 1) and s.min() >= -0.5 and s.max() <= 0.5
    assert abs(s.mean()) < 0.02
    pt = DisturbanceSpec("point", [[0.1, 0.1]])
    np.testing.assert_array_equal(pt.sample(np.random.default_rng(0), 3), [[0.1]] * 3)
    with pytest.raises(ValueError):
        DisturbanceSpec("uniform", [[0.5, -0.5]])
    with pytest.raises(ValueError):
        DisturbanceSpec("gaussian", [[0, 1]])
