import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from conftest import load, random_dataset
from regdepth.core import BudgetExceeded, fits_through_subsets, is_general_position
from regdepth.depth import rdepth_exact, rdepth_oracle, witness_count
from regdepth.median import (deepest_fit, exact_cost, k_star_approx, k_star_exact)


def oracle_k_star(d):
    """Maximum oracle depth over every fit through p observations."""
    S = np.array(list(itertools.combinations(range(d.n), d.p)))
    B, ok = fits_through_subsets(d, S)
    return max(rdepth_oracle(d, b) for b in B[ok])


def test_four_point_maximizers(four):
    res = k_star_exact(four)
    assert res.k_star == 2 and res.depth == 0.5
    assert sorted(m.subset for m in res.maximizers) == list(itertools.combinations(range(4), 2))
    for m in res.maximizers:
        assert m.witness.count == 2
        assert witness_count(four, m.fit, m.witness) == 2


def test_four_point_median_is_mean_of_maximizers(four):
    res = k_star_exact(four, witnesses=False)
    expected = (Fraction(-11, 4) / 6, Fraction(23, 12) / 6)
    np.testing.assert_allclose(res.t_star.beta, [float(c) for c in expected], rtol=1e-15)


def test_collinear_data_have_a_unique_maximizer():
    d = load("collinear.csv")
    with pytest.warns(UserWarning, match="general position"):
        res = k_star_exact(d)
    assert res.k_star == d.n and len(res.maximizers) == 1
    np.testing.assert_allclose(res.t_star.beta, [1.0, 2.0])


def test_gaussian_fixture_against_oracle():
    d = load("gauss_p2_n20.csv")
    assert k_star_exact(d, witnesses=False).k_star == oracle_k_star(d) == 9


@pytest.mark.parametrize("p,n,reps", [(2, 8, 3), (2, 11, 3), (3, 6, 3), (3, 7, 1)])
def test_small_instances_against_oracle(p, n, reps):
    rng = np.random.default_rng([p, n])
    for _ in range(reps):
        d = random_dataset(rng, n, p)
        assert k_star_exact(d, witnesses=False).k_star == oracle_k_star(d)


def test_no_fit_is_deeper_than_k_star():
    rng = np.random.default_rng(8)
    d = random_dataset(rng, 10, 3)
    k = k_star_exact(d, witnesses=False).k_star
    res = k_star_exact(d, witnesses=False)
    for beta in rng.standard_normal((300, 3)) * 0.5 + res.t_star.beta:
        assert rdepth_exact(d, beta).count <= k


@pytest.mark.parametrize("p,n", [(2, 12), (2, 20), (3, 10), (3, 14)])
def test_k_star_lower_bound(p, n):
    rng = np.random.default_rng([n, p, 1])
    for _ in range(5):
        d = random_dataset(rng, n, p)
        assert is_general_position(d).ok
        assert k_star_exact(d, witnesses=False).k_star >= math.ceil(n / (p + 1))


def test_maximizers_shift_with_the_data():
    rng = np.random.default_rng(9)
    d = random_dataset(rng, 9, 3)
    b = np.array([2.0, -1.0, 0.5])
    r0 = k_star_exact(d, witnesses=False)
    r1 = k_star_exact(d.shifted(b), witnesses=False)
    assert r0.k_star == r1.k_star
    assert [m.subset for m in r0.maximizers] == [m.subset for m in r1.maximizers]
    for m0, m1 in zip(r0.maximizers, r1.maximizers):
        np.testing.assert_allclose(m1.fit.beta, m0.fit.beta + b, atol=1e-9)
    np.testing.assert_allclose(r1.t_star.beta, r0.t_star.beta + b, atol=1e-9)


def test_workers_do_not_change_the_result():
    d = load("gauss_p3_n30.csv")
    a = k_star_exact(d, witnesses=False, workers=1).to_dict()
    b = k_star_exact(d, witnesses=False, workers=3).to_dict()
    assert a == b


def test_budget_is_enforced():
    d = random_dataset(np.random.default_rng(0), 60, 5)
    with pytest.raises(BudgetExceeded):
        k_star_exact(d)
    assert exact_cost(60, 5)[0] == math.comb(60, 5)


def test_budget_from_environment(monkeypatch, four):
    monkeypatch.setenv("REGDEPTH_BUDGET", "10")
    with pytest.raises(BudgetExceeded):
        k_star_exact(four)
    monkeypatch.setenv("REGDEPTH_BUDGET", "lots")
    with pytest.raises(ValueError):
        k_star_exact(four)


def test_approx_with_every_subset_is_exact():
    d = load("gauss_p2_n20.csv")
    a = k_star_approx(d, n_subsets=10_000)
    e = k_star_exact(d, witnesses=False)
    assert a.k_star == e.k_star and a.mode == "approximate"
    np.testing.assert_allclose(a.t_star.beta, e.t_star.beta)


def test_approx_never_exceeds_exact():
    rng = np.random.default_rng(12)
    for _ in range(10):
        d = random_dataset(rng, 15, 3)
        a = k_star_approx(d, n_subsets=40, seed=int(rng.integers(1 << 30)))
        assert a.k_star <= k_star_exact(d, witnesses=False).k_star


def test_approx_is_seeded():
    d = load("gauss_p3_n30.csv")
    a = k_star_approx(d, n_subsets=300, seed=4).to_dict()
    b = k_star_approx(d, n_subsets=300, seed=4, workers=2).to_dict()
    assert a == b


def test_approx_improves_monotonically_on_large_fixture():
    d = load("gauss_p5_n200.csv")
    ks = [k_star_approx(d, n_subsets=m, n_dirs=50, seed=1).k_star for m in (100, 200, 400)]
    assert ks == sorted(ks)
    assert ks[-1] >= math.ceil(200 / 6)


def test_deepest_fit_dispatch(four):
    assert deepest_fit(four).mode == "exact"
    assert deepest_fit(four, "approx", n_subsets=3).mode == "approximate"
    big = random_dataset(np.random.default_rng(1), 120, 5)
    assert deepest_fit(big, n_subsets=50, n_dirs=20).mode == "approximate"
    with pytest.raises(ValueError):
        k_star_approx(four, n_subsets=0)
