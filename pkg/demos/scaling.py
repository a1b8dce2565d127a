"""
Running time of the exact deepest-fit search
============================================

Times ``k_star_exact`` on Gaussian samples over a grid of (p, n) and writes
a markdown table to results/scaling.md. One worker, best of three runs.
"""
import math
import sys
import time
import warnings
from pathlib import Path

from regdepth.median import exact_cost, k_star_exact
from regdepth.sim import gen_std_normal

warnings.simplefilter("ignore")
OUT = Path(__file__).resolve().parents[1] / "results" / "scaling.md"

GRID = [(2, n) for n in (20, 50, 100, 200, 400)] + \
       [(3, n) for n in (10, 20, 30, 40, 60)] + \
       [(4, n) for n in (10, 15, 20)] + \
       [(5, n) for n in (10, 15, 20)]

rows = []
for p, n in GRID:
    d = gen_std_normal(p, n, seed=7)
    best = math.inf
    for _ in range(3):
        t0 = time.perf_counter()
        res = k_star_exact(d, witnesses=False, check_position=False)
        best = min(best, time.perf_counter() - t0)
    subsets, ops = exact_cost(n, p)
    rows.append(f"| {p} | {n} | {subsets} | {ops:.2e} | {res.k_star} | {best:.3f} |")
    print(rows[-1], file=sys.stderr)

# the candidate fits grow as C(n, p) and each costs C(n, p-1) axes for p >= 3,
# so the time grows roughly like n^(2p-1); p = 2 uses a sort-and-sweep per fit
OUT.parent.mkdir(exist_ok=True)
OUT.write_text(
    "# Exact deepest fit: scaling\n\n"
    "Gaussian samples (seed 7), one worker, best of three runs, seconds.\n"
    "`ops` is the operation estimate used by the budget check.\n\n"
    "| p | n | p-subsets | ops | k* | seconds |\n|---|---|---|---|---|---|\n"
    + "\n".join(rows) + "\n", encoding="utf-8")
print(OUT.read_text())
