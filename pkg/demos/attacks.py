"""
Breaking the deepest-fit median
===============================

On a Gaussian sample with n = 20 and p = 2:

1. the bounds implied by k*,
2. the addition and replacement attacks with m = k* - p + 1 stacked points,
   and how far the median moves as the stack's y grows,
3. the null-space pair: two additions of n - p + 1 points that no
   regression-equivariant estimator can tell apart,
4. the smallest m the empirical search needs, addition and replacement.

On some samples the addition attack needs one more point than
m = k* - p + 1; the script reports what it finds.
"""
import sys
import warnings
from pathlib import Path

import numpy as np

from regdepth.breakdown import (ADDITION, REPLACEMENT, AttackConstructionFailed,
                                attack_addition, attack_nullspace_pair, attack_replacement,
                                bounds_from_k, contaminate, empirical_breakdown_search)
from regdepth.core import read_csv
from regdepth.median import k_star_exact

warnings.simplefilter("ignore")
ROOT = Path(__file__).resolve().parents[1]
path = sys.argv[1] if len(sys.argv) > 1 else ROOT / "tests" / "fixtures" / "gauss_p2_n20.csv"
d = read_csv(path)
base = k_star_exact(d, witnesses=False)
b = bounds_from_k(d.n, d.p, base.k_star)
print(f"{Path(path).name}: n={d.n} p={d.p} k*={base.k_star} m=k*-p+1={b.m_min}")
print(f"  exact ABP {b.abp_exact}, RBP upper bound {b.rbp_ub}, RH99 bound {b.rh99_lb}")
print(f"  t* = {np.round(base.t_star.beta, 4)}")


def t_norm(c):
    return np.linalg.norm(k_star_exact(c, witnesses=False, check_position=False).t_star.beta)


for attack, mode in ((attack_addition, ADDITION), (attack_replacement, REPLACEMENT)):
    print(f"\n{mode} attack with m = {b.m_min}:")
    try:
        plan, _ = attack(d, 1e3, seed=1, base=base)
    except AttackConstructionFailed as exc:
        print(f"  no verified placement: {exc}")
        continue
    x, y0 = plan.site_z[:-1], plan.site_z[-1]
    print(f"  site x={np.round(x, 4)}, anchors {plan.anchor_indices}, verified after "
          f"{plan.tries} placement(s)")
    for y in (1e2, 1e4, 1e6):
        c = contaminate(d, x, np.sign(y0) * y, plan.m, mode, plan.replaced_indices)
        print(f"  |y| = {y:8.0e}: ||t*|| = {t_norm(c):.4g}")

print("\nnull-space pair:")
plan, (first, second) = attack_nullspace_pair(d, 1e3)
t1 = k_star_exact(first, witnesses=False, check_position=False).t_star.beta
t2 = k_star_exact(second, witnesses=False, check_position=False).t_star.beta
print(f"  m = n - p + 1 = {plan.m}; shift b = {np.round(plan.site_z, 4)}")
print(f"  t*(first) - t*(second) = {np.round(t1 - t2, 4)}")
# subtracting (1, x')b from every response of the first set gives the second
print("  first responses minus (1, x')b equal the second's:",
      bool(np.allclose(first.y - first.design @ plan.site_z, second.y)))

print("\nempirical search for the smallest breaking m:")
for mode in (ADDITION, REPLACEMENT):
    r = empirical_breakdown_search(d, mode, m_max=b.m_min + 2, seed=0)
    kind = r.strategy["kind"] if r.strategy else "none"
    print(f"  {mode:11}: m_emp = {r.m_emp} (m = {b.m_min}), strategy {kind}, "
          f"{r.evaluated} strategies tried")
