"""
The four-point example
======================

Four points in general position in the plane, the six lines through pairs
of them, and their average. Each pair line has depth 2 of 4 (the maximum);
the average line has depth 0 and so is not itself a deepest fit. Prints the
depths with the tilt counts, the deepest-fit summary and the breakdown
bounds for this dataset.
"""
from fractions import Fraction

import numpy as np

from regdepth.breakdown import bounds_from_k
from regdepth.core import Dataset
from regdepth.depth import rdepth_exact
from regdepth.median import k_star_exact

d = Dataset(np.array([[0.0], [1.0], [5.0], [6.0]]), np.array([0.0, 1.0, 0.0, 1.0]),
            "four points")

res = k_star_exact(d)
print(f"k* = {res.k_star} of n = {d.n}, {len(res.maximizers)} deepest lines")
print(f"{'intercept':>10} {'slope':>8}  depth  tilt axis at x = v")
for mx in res.maximizers:
    a, b = (Fraction(c).limit_denominator(1000) for c in mx.fit.beta)
    w = rdepth_exact(d, mx.fit.beta)
    print(f"{str(a):>10} {str(b):>8}  {w.count}/{d.n}  v = {w.cut_v:g}, {w.tilt_side}")

# the average of the six lines
avg = res.t_star.beta
w = rdepth_exact(d, avg)
a, b = (Fraction(c).limit_denominator(1000) for c in avg)
print(f"\naverage line: intercept {a}, slope {b}; depth {w.count}")
total = np.sum([mx.fit.beta for mx in res.maximizers], axis=0)
print(f"sum of the six coefficient vectors: ({Fraction(total[0]).limit_denominator(1000)}, "
      f"{Fraction(total[1]).limit_denominator(1000)}); depth {rdepth_exact(d, total).count}")
print("both have depth 0 < k* = 2: averaging deepest lines can leave the deepest set")

print("\nbreakdown bounds from k* = 2:")
for key, val in bounds_from_k(d.n, d.p, res.k_star).to_dict().items():
    if isinstance(val, dict) and "fraction" in val:
        print(f"  {key:16} {val['fraction']}")
