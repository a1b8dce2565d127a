"""Maximum regression depth ``k*`` and the deepest-fit median.

The deepest fits are searched among fits passing through ``p`` observations:
depth can only grow when a fit is moved onto more observations, so the
maximum is attained at such a fit. The median is the coordinate-wise average
of all distinct maximisers.
"""
from __future__ import annotations

import itertools
import logging
import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .core import (BudgetExceeded, Dataset, Fit, fits_through_subsets, is_general_position,
                   residual_signs)
from .depth import (AxisKernel, DepthWitness, kernel_for, rdepth_approx_counts,
                    witnesses_for)

log = logging.getLogger(__name__)

MAX_SUBSETS = 5_000_000
MAX_OPS = 10**10
DEDUP_TOL = 1e-9
CHUNK = 2048
TIGHTEN_BLOCK = 256
MAX_EXACT_PLANES = 500_000


def budget_from_env(default: int = MAX_OPS) -> int:
    """Operation budget, overridable with the ``REGDEPTH_BUDGET`` variable."""
    raw = os.environ.get("REGDEPTH_BUDGET")
    if raw is None:
        return default
    try:
        return int(float(raw))
    except ValueError:
        raise ValueError(f"REGDEPTH_BUDGET must be a number, got {raw!r}") from None


@dataclass(frozen=True)
class Maximizer:
    subset: tuple[int, ...]
    fit: Fit
    witness: DepthWitness | None = None


@dataclass(frozen=True, eq=False)
class DeepestFitResult:
    k_star: int
    n: int
    maximizers: list[Maximizer]
    t_star: Fit
    mode: str = "exact"
    n_candidates: int = 0
    info: dict = field(default_factory=dict)

    @property
    def depth(self) -> float:
        return self.k_star / self.n

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "n": self.n,
            "k_star": int(self.k_star),
            "max_depth": self.depth,
            "t_star": [float(c) for c in self.t_star.beta],
            "n_candidates": int(self.n_candidates),
            "maximizers": [
                {
                    "subset": [int(i) for i in m.subset],
                    "beta": [float(c) for c in m.fit.beta],
                    **({"witness": m.witness.to_dict()} if m.witness is not None else {}),
                }
                for m in self.maximizers
            ],
        }


def exact_cost(n: int, p: int) -> tuple[int, int]:
    """(number of p-subsets, rough count of elementary operations)."""
    subsets = math.comb(n, p)
    if p == 2:
        ops = subsets * n * max(1, math.ceil(math.log2(n)))
    else:
        ops = subsets * math.comb(n, p - 1) * n
    return subsets, ops


def check_budget(n, p, max_subsets=MAX_SUBSETS, max_ops=None):
    max_ops = budget_from_env() if max_ops is None else max_ops
    subsets, ops = exact_cost(n, p)
    if subsets > max_subsets or ops > max_ops:
        raise BudgetExceeded(
            f"exact deepest fit for n={n}, p={p} needs {subsets} subsets and ~{ops:.3g} "
            f"operations (limits {max_subsets}, {max_ops:.3g}); use k_star_approx")


def _dedupe(betas, order):
    """Indices (into ``order``) of fits not within tolerance of an earlier one."""
    B = betas[np.asarray(order, dtype=int)]
    tol = DEDUP_TOL * (1 + np.abs(B))
    if len(B) <= 512:
        close = np.all(np.abs(B[:, None] - B[None]) <= tol[None], axis=2)
        kept = []
        for i in range(len(B)):
            if not close[i, kept].any():
                kept.append(i)
    else:
        kept = [0]
        for i in range(1, len(B)):
            if not np.all(np.abs(B[kept] - B[i]) <= tol[kept], axis=1).any():
                kept.append(i)
    return [order[i] for i in kept]


def _chunked_counts(d, kernel, betas, workers):
    chunks = [slice(lo, lo + CHUNK) for lo in range(0, len(betas), CHUNK)]

    def run(sl):
        pos, neg = residual_signs(d, betas[sl])
        return kernel.costs(pos, neg)

    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(workers) as ex:
            parts = list(ex.map(run, chunks))
    else:
        parts = [run(sl) for sl in chunks]
    if not parts:
        return np.empty(0, dtype=np.int64)
    return np.concatenate(parts).astype(np.int64)


def _result(d, subsets, betas, counts, mode, witnesses, n_candidates, info=None,
            kernel=None):
    k_star = int(counts.max())
    top = np.flatnonzero(counts == k_star)
    keep = _dedupe(betas, top)
    if witnesses:
        kernel = kernel if kernel is not None else kernel_for(d, budget=None)
        ws = witnesses_for(d, betas[keep], kernel)
    else:
        ws = [None] * len(keep)
    maximizers = [Maximizer(tuple(int(j) for j in subsets[i]), Fit(betas[i]), w)
                  for i, w in zip(keep, ws)]
    t_star = Fit(np.mean([m.fit.beta for m in maximizers], axis=0))
    return DeepestFitResult(k_star, d.n, maximizers, t_star, mode, n_candidates, info or {})


def k_star_exact(d: Dataset, *, witnesses: bool = True, workers: int = 1,
                 max_subsets: int = MAX_SUBSETS, max_ops: int | None = None,
                 check_position: bool = True) -> DeepestFitResult:
    """Exact ``k*`` and deepest-fit median by enumerating all p-point fits.

    Parameters
    ----------
    witnesses : bool
        Attach a depth witness to every maximiser (costs one exact depth
        evaluation each).
    workers : int
        Threads used for the depth evaluation; the result does not depend on
        it.
    check_position : bool
        Warn when the data are not in general position (skipped when the check
        itself would be too expensive).

    Raises
    ------
    BudgetExceeded
        When ``C(n, p)`` or the estimated work is above the limits.
    """
    n, p = d.n, d.p
    check_budget(n, p, max_subsets, max_ops)
    if check_position:
        try:
            gp = is_general_position(d, max_subsets=200_000)
            if not gp.ok:
                warnings.warn(f"data not in general position (e.g. {gp.offending})",
                              stacklevel=2)
        except BudgetExceeded:
            pass
    subsets = np.array(list(itertools.combinations(range(n), p)), dtype=int)
    betas, ok = fits_through_subsets(d, subsets)
    subsets, betas = subsets[ok], betas[ok]
    if len(betas) == 0:
        raise ValueError("no p-subset determines a non-vertical fit")
    kernel = kernel_for(d, budget=None)
    counts = _chunked_counts(d, kernel, betas, workers)
    return _result(d, subsets, betas, counts, "exact", witnesses, len(betas), kernel=kernel)


def _sample_subsets(n, p, n_subsets, rng):
    """First ``n_subsets`` distinct p-subsets of a fixed random stream.

    Samples are nested: a larger request extends a smaller one.
    """
    total = math.comb(n, p)
    if n_subsets >= total:
        return np.array(list(itertools.combinations(range(n), p)), dtype=int)
    if total <= MAX_SUBSETS:
        allsub = np.array(list(itertools.combinations(range(n), p)), dtype=int)
        return allsub[rng.permutation(total)[:n_subsets]]
    seen = {}
    while len(seen) < n_subsets:
        draw = np.sort(rng.random((1024, n)).argsort(axis=1)[:, :p], axis=1)
        for row in map(tuple, draw):
            seen.setdefault(row, None)
            if len(seen) == n_subsets:
                break
    return np.array(list(seen), dtype=int)


def k_star_approx(d: Dataset, n_subsets: int = 2000, n_dirs: int = 200, seed=0, *,
                  witnesses: bool = False, exact_depth_ops: int = 2 * 10**6,
                  max_planes: int = 20000, workers: int = 1) -> DeepestFitResult:
    """Deepest fit over a random sample of p-point fits.

    When one exact depth evaluation is cheap (at most ``exact_depth_ops``
    elementary steps) every sampled fit gets its exact depth. Otherwise a
    random sample of ``max_planes`` candidate axes replaces the full
    enumeration and the counts are upper bounds. The most promising fits are
    then re-evaluated, in decreasing order of their count until no remaining
    fit can beat the best re-evaluated one: exactly when the full set of
    axes fits in memory, otherwise with ``n_dirs`` random directions.

    ``k*`` of the sample can fall short of the true ``k*``. Only in the
    last case (``info["exact_depth"]`` False) can it also exceed it.
    Samples are nested: a larger ``n_subsets`` with the same seed extends a
    smaller one.
    """
    if n_subsets < 1:
        raise ValueError("n_subsets must be positive")
    sub_ss, dir_ss, plane_ss = np.random.SeedSequence(seed).spawn(3)
    n, p = d.n, d.p
    subsets = _sample_subsets(n, p, n_subsets, np.random.default_rng(sub_ss))
    betas, ok = fits_through_subsets(d, subsets)
    subsets, betas = subsets[ok], betas[ok]
    if len(betas) == 0:
        raise ValueError("no sampled subset determines a non-vertical fit")
    depth_ops = math.comb(n, p - 1) * n if p > 2 else n
    if depth_ops <= exact_depth_ops:
        kernel = kernel_for(d, budget=None)
    else:
        kernel = AxisKernel(d.X, max_planes=max_planes, rng=plane_ss)
    counts = _chunked_counts(d, kernel, betas, workers)
    tightened, exact = 0, kernel.exact
    if not exact:
        # sampled-axis counts are upper bounds: tighten the leading fits, with
        # the full axis set when it fits in memory, else with random directions
        exact = math.comb(n, p - 1) <= MAX_EXACT_PLANES
        if exact:
            full = kernel_for(d, budget=None)

            def tighten(idx):
                return _chunked_counts(d, full, betas[idx], workers)
        else:
            def tighten(idx):
                bound = rdepth_approx_counts(d, betas[idx], n_dirs=n_dirs, seed=dir_ss)
                return np.minimum(counts[idx], bound)
        order = np.argsort(-counts, kind="stable")
        best = -1
        for lo in range(0, len(order), TIGHTEN_BLOCK):
            block = order[lo:lo + TIGHTEN_BLOCK]
            block = block[counts[block] >= best]
            if block.size == 0:
                break
            counts[block] = tighten(block)
            tightened += block.size
            best = max(best, int(counts[block].max()))
        if exact:
            kernel = full
    info = {"exact_depth": bool(exact), "sampled": int(len(betas)),
            "tightened": int(tightened)}
    return _result(d, subsets, betas, counts, "approximate", witnesses and exact,
                   len(betas), info, kernel)


def deepest_fit(d: Dataset, mode: str = "auto", **kw) -> DeepestFitResult:
    """Exact result when affordable, otherwise the sampled approximation."""
    if mode == "exact":
        return k_star_exact(d, **kw)
    if mode == "approx":
        return k_star_approx(d, **kw)
    try:
        check_budget(d.n, d.p, max_ops=kw.pop("max_ops", None))
    except BudgetExceeded:
        return k_star_approx(d, **kw)
    return k_star_exact(d, **kw)
