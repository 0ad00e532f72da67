import numpy as np
import pytest

from ccmpc.extraction import RANK_TOL, extract_control
from ccmpc.moments import MomentSequence, delta_moments, empirical_moments, moment_matrix
from ccmpc.poly import monomial_basis


def test_point_mass():
    res = extract_control(delta_moments([0.3], 4), 2, 1e-6)
    assert res.u_star[0] == pytest.approx(0.3, abs=1e-15)
    assert res.rank_ratio < 1e-12 and res.certified
    assert res.consistency < 1e-15


def test_two_atom_mixture_rejected():
    y = empirical_moments(np.array([[-1.0], [1.0]]), 4)
    res = extract_control(y, 2)
    assert res.u_star[0] == pytest.approx(0.0, abs=1e-15)
    assert not res.certified
    assert res.consistency == pytest.approx(1.0)


def test_example_input_vector():
    u = [-0.5634, -0.4647, 0.0007]
    res = extract_control(delta_moments(u, 6), 3)
    np.testing.assert_allclose(res.u_star, u, atol=1e-15)
    assert res.certified


def test_round_trip_random(rng):
    for _ in range(100):
        n, r = int(rng.integers(1, 5)), int(rng.integers(1, 4))
        u = rng.uniform(-1, 1, n)
        res = extract_control(delta_moments(u, 2 * r), r, 1e-6)
        np.testing.assert_allclose(res.u_star, u, atol=1e-12)
        assert res.rank_ratio < 1e-12


def test_rank_ratio_permutation_invariant(rng):
    pts = rng.uniform(-1, 1, (3, 3))
    perm = [2, 0, 1]
    a = extract_control(empirical_moments(pts, 4), 2)
    b = extract_control(empirical_moments(pts[:, perm], 4), 2)
    assert a.rank_ratio == pytest.approx(b.rank_ratio, rel=1e-10)
    np.testing.assert_allclose(b.u_star, a.u_star[perm])


def test_trace_closed_form(rng):
    for _ in range(10):
        n, r = int(rng.integers(1, 4)), int(rng.integers(1, 4))
        u = rng.uniform(-1, 1, n)
        expect = sum(np.prod(u ** (2 * np.array(a))) for a in monomial_basis(n, r))
        assert extract_control(delta_moments(u, 2 * r), r).trace == pytest.approx(expect, abs=1e-10)


def test_errors_and_default_tolerance():
    assert RANK_TOL == 1e-3
    with pytest.raises(ValueError, match="zero mass"):
        extract_control(MomentSequence(1, 2, [0.0, 0.0, 0.0]), 1)
    with pytest.raises(ValueError, match="unit mass"):
        extract_control(MomentSequence(1, 2, [2.0, 0.0, 0.0]), 1)


def test_as_dict():
    d = extract_control(delta_moments([0.1, 0.2], 2), 1).as_dict()
    assert set(d) == {"u_star", "rank_ratio", "certified", "trace", "consistency"}
