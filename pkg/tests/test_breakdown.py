from fractions import Fraction

import numpy as np
import pytest

from regdepth.breakdown import (AttackConstructionFailed, attack_addition,
                                attack_nullspace_pair, attack_replacement, bounds_from_k,
                                bounds_report, breaks_down, certificate, contaminate,
                                empirical_breakdown_search, max_norm_below, null_direction)
from regdepth.core import DegenerateSubset
from regdepth.depth import rdepth_counts
from regdepth.median import k_star_exact
from regdepth.sim import gen_std_normal

F = Fraction


@pytest.mark.parametrize("n,p,k,abp,rbp,lb,eq", [
    (4, 2, 2, F(1, 5), F(1, 4), F(1, 4), F(3, 7)),
    (10, 2, 5, F(2, 7), F(2, 5), F(3, 10), F(9, 19)),
    (20, 3, 7, F(5, 25), F(5, 20), F(3, 20), F(18, 38)),
    (10, 5, 4, F(0, 10), F(0, 10), F(-2, 10), F(6, 16)),
    (200, 5, 60, F(56, 256), F(56, 200), F(30, 200), F(196, 396)),
])
def test_bounds_grid(n, p, k, abp, rbp, lb, eq):
    b = bounds_from_k(n, p, k)
    assert (b.abp_exact, b.rbp_ub, b.rh99_lb, b.equivariant_ub) == (abp, rbp, lb, eq)
    assert b.m_min == k - p + 1
    assert b.asymptotic_ref == F(1, 3)


def test_negative_lower_bound_is_flagged():
    b = bounds_from_k(10, 5, 6)
    assert b.rh99_lb == F(-1, 5)
    assert {"rh99_lb_uninformative", "rh99_lb_negative"} <= set(b.flags)
    assert "rh99_lb_uninformative" not in bounds_from_k(10, 2, 5).flags


def test_bounds_serialisation():
    d = bounds_from_k(4, 2, 2, approximate=True).to_dict()
    assert d["abp_exact"] == {"num": 1, "den": 5, "fraction": "1/5",
                              "decimal": "0.20000000000000001"}
    assert "k_star_approximate" in d["flags"]


@pytest.mark.parametrize("args", [(4, 1, 2), (4, 5, 2), (4, 2, 5), (4, 2, -1)])
def test_bounds_reject_bad_arguments(args):
    with pytest.raises(ValueError):
        bounds_from_k(*args)


def test_bounds_report(four):
    b = bounds_report(four)
    assert b.k_star == 2 and b.abp_exact == F(1, 5)


def test_addition_attack_on_figure(four):
    plan, c = attack_addition(four, 1e4, seed=1)
    assert plan.m == 1 and c.n == 5
    assert plan.k_star == 2
    assert int(rdepth_counts(c, plan.beta_c[None])[0]) == 2
    assert np.linalg.norm(plan.t_star) > 1e3


def test_addition_attack_grows_linearly():
    d = gen_std_normal(2, 6, 1000)
    plan, _ = attack_addition(d, 1e6, seed=0)
    x, s = plan.site_z[:-1], np.sign(plan.site_z[-1])
    ok, norms = breaks_down(lambda y: contaminate(d, x, s * y, plan.m), certificate(d))
    assert ok and norms[-1] > 1e5


def test_addition_attack_failure_is_reported():
    # k* = 3 and m = 2, yet no stack of 2 points on a vertical line through a
    # design point breaks the median here; 3 points do
    d = gen_std_normal(2, 7, 1001)
    assert k_star_exact(d, witnesses=False).k_star == 3
    with pytest.raises(AttackConstructionFailed) as err:
        attack_addition(d, 1e4, seed=1)
    assert err.value.diagnostics and all(g["k_star"] > 3 or g["through_site"] == 0
                                         for g in err.value.diagnostics)
    r = empirical_breakdown_search(d, m_max=3)
    assert r.m_emp == 3


def test_replacement_attack():
    d = gen_std_normal(2, 10, 7)
    plan, c = attack_replacement(d, 1e5, seed=2)
    assert c.n == d.n and len(plan.replaced_indices) == plan.m
    assert not set(plan.replaced_indices) & set(plan.anchor_indices)
    assert np.linalg.norm(plan.t_star) > 1e3


def test_attack_rejects_nonpositive_magnitude(four):
    with pytest.raises(ValueError):
        attack_addition(four, 0.0, seed=0)


def test_nullspace_pair_zero_shift_is_identical(four):
    _, (a, b) = attack_nullspace_pair(four, 0.0)
    np.testing.assert_array_equal(a.points(), b.points())


def test_nullspace_pair_estimates_differ_by_the_shift():
    d = gen_std_normal(2, 5, 3)
    plan, (a, b) = attack_nullspace_pair(d, 7.0)
    assert plan.m == 4 and a.n == b.n == 9
    ta = k_star_exact(a, witnesses=False, check_position=False).t_star.beta
    tb = k_star_exact(b, witnesses=False, check_position=False).t_star.beta
    np.testing.assert_allclose(ta - tb, plan.site_z, atol=1e-8)
    assert np.linalg.norm(plan.site_z) == pytest.approx(7.0)


def test_null_direction():
    u = null_direction([[1.0, 2.0]])
    np.testing.assert_allclose(u, np.array([2.0, -1.0]) / np.sqrt(5))
    with pytest.raises(DegenerateSubset):
        null_direction(np.zeros((1, 3)))


def test_fewer_points_stay_inside_certificate():
    d = gen_std_normal(2, 8, 1002)
    k = k_star_exact(d, witnesses=False).k_star
    m = k - d.p + 1
    assert max_norm_below(d, m - 1) <= certificate(d)


def test_search_on_figure(four):
    r = empirical_breakdown_search(four, m_max=2)
    assert r.m_emp == 1 and r.norms[-1] > r.certificate
