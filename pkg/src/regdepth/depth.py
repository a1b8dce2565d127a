"""Regression depth of a single fit.

The count of a fit ``beta`` is the fewest observations its hyperplane has to
pass when tilted about some axis until it becomes vertical. An axis is the
intersection of the fit with a vertical hyperplane ``{(x, y): x'u = v}``;
tilting one way touches

    T+ = #{r_i >= 0, s_i < v} + #{r_i <= 0, s_i > v}

and the other way ``T-`` (signs exchanged), where ``s_i = x_i'u``. Zero
residuals count on both sides. A point lying on the vertical hyperplane
(``s_i = v``) is touched only if its residual is zero: the tilting hyperplane
meets it on the axis at the start, and otherwise never reaches it before
becoming vertical.

Four evaluators are provided: an exact enumeration for any ``p``, a sorting
sweep for ``p = 2``, a randomized upper bound and a brute-force tilt
simulation used as a test oracle.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .core import BudgetExceeded, Dataset, DimensionError, Fit, _check, residual_signs

TOWARD = "toward"
AWAY = "away"
GEOM_TOL = 1e-9
DEFAULT_DEPTH_BUDGET = 10**10


@dataclass(frozen=True, eq=False)
class DepthWitness:
    """Achieved depth count and the vertical hyperplane that realises it.

    ``tilt_side`` is ``"toward"`` when the count is ``T+`` for
    ``(direction_u, cut_v)`` and ``"away"`` when it is ``T-``.
    """

    count: int
    n: int
    direction_u: np.ndarray
    cut_v: float
    tilt_side: str

    @property
    def fraction(self) -> float:
        return self.count / self.n

    def to_dict(self) -> dict:
        return {
            "count": int(self.count),
            "fraction": self.fraction,
            "direction_u": [float(c) for c in self.direction_u],
            "cut_v": float(self.cut_v),
            "tilt_side": self.tilt_side,
        }


def tilt_counts(d: Dataset, f, u, v) -> tuple[int, int]:
    """``(T+, T-)`` for the axis ``x'u = v``.

    Points on the vertical hyperplane itself count for both tilts when their
    residual is zero and for neither otherwise.
    """
    pos, neg = residual_signs(d, f)
    u = np.asarray(u, dtype=float).reshape(-1)
    s = d.X @ u
    tol = GEOM_TOL * (1.0 + np.abs(s).max() + abs(v))
    left = s < v - tol
    right = s > v + tol
    on = ~(left | right) & pos & neg
    t_plus = np.count_nonzero(left & pos) + np.count_nonzero(right & neg)
    t_minus = np.count_nonzero(left & neg) + np.count_nonzero(right & pos)
    k = int(np.count_nonzero(on))
    return int(t_plus) + k, int(t_minus) + k


def witness_count(d: Dataset, f, w: DepthWitness) -> int:
    """Recount the points touched by the tilt recorded in ``w``."""
    t_plus, t_minus = tilt_counts(d, f, w.direction_u, w.cut_v)
    return t_plus if w.tilt_side == TOWARD else t_minus


# --- axis kernel ------------------------------------------------------------------
#
# All evaluators reduce to: given x-points X (m, k) and 0/1 weights a = [r >= 0],
# b = [r <= 0], find the vertical hyperplane x'u = v minimising
#     sum_{s < v} a + sum_{s > v} b + sum_{s = v} a*b
# over both orientations of u. Moving the hyperplane onto further points never
# increases this cost, so it suffices to try hyperplanes spanned by points.


def _sweep_1d(s, A, B, tol):
    """Best axis on a line for every weight row.

    Returns costs (F,), the axis position ``v`` and an orientation flag (True
    when points below ``v`` are charged with ``A``).
    """
    m = s.size
    order = np.argsort(s, kind="stable")
    ss = s[order]
    starts = np.concatenate(([0], np.flatnonzero(ss[1:] - ss[:-1] > tol) + 1))
    ends = np.append(starts[1:], m)
    F = A.shape[0]
    A, B = A[:, order], B[:, order]
    cA = np.zeros((F, m + 1))
    cB = np.zeros((F, m + 1))
    cZ = np.zeros((F, m + 1))
    np.cumsum(A, axis=1, out=cA[:, 1:])
    np.cumsum(B, axis=1, out=cB[:, 1:])
    np.cumsum(A * B, axis=1, out=cZ[:, 1:])
    totA, totB = cA[:, -1:], cB[:, -1:]
    # axes between groups (and outside the range), then axes through each group
    gap = np.append(starts, m)
    gap_v = np.concatenate(([ss[0] - 1.0], (ss[starts[1:] - 1] + ss[starts[1:]]) / 2,
                            [ss[-1] + 1.0]))
    zg = cZ[:, ends] - cZ[:, starts]
    plus = np.hstack([cA[:, gap] + totB - cB[:, gap],
                      cA[:, starts] + totB - cB[:, ends] + zg])
    minus = np.hstack([cB[:, gap] + totA - cA[:, gap],
                       cB[:, starts] + totA - cA[:, ends] + zg])
    vals = np.concatenate((gap_v, ss[starts]))
    ip = plus.argmin(axis=1)
    im = minus.argmin(axis=1)
    rows = np.arange(F)
    vp = plus[rows, ip]
    vm = minus[rows, im]
    use_plus = vp <= vm
    cost = np.where(use_plus, vp, vm)
    v = vals[np.where(use_plus, ip, im)]
    return cost, v, use_plus


class AxisKernel:
    """Candidate tilt axes of a fixed point set.

    The set is first reduced to its affine hull. When the hull is a proper
    flat of x-space, one vertical hyperplane contains every point and the
    count is the number of zero residuals. On a line the axes are handled by
    a sweep; in dimension ``r >= 2`` the kernel stores every hyperplane through
    ``r`` affinely independent points, deduplicated by the set of points it
    carries.

    Parameters
    ----------
    X : (m, k) array
    line : {"sweep", "enumerate"}
        Evaluation on one-dimensional sets.
    max_planes, rng
        Keep only a random subset of hyperplanes. Costs are then upper bounds.
    """

    def __init__(self, X, line="sweep", max_planes=None, rng=None):
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X.reshape(-1, 1)
        self.X = X
        self.m, self.k = m, k = X.shape
        self.exact = True
        self.scale = max(1.0, float(np.abs(X).max())) if m else 1.0
        self.tol = GEOM_TOL * self.scale
        self.centre = X.mean(axis=0) if m else np.zeros(k)
        C = X - self.centre
        _, sv, Vt = np.linalg.svd(C, full_matrices=True)
        rank = int(np.count_nonzero(sv > self.tol * math.sqrt(max(m, 1))))
        self.rank = rank
        self.Vt = Vt
        if rank < k:
            self.kind = "flat"
            return
        Y = C @ Vt[:rank].T
        if rank == 1 and line == "sweep":
            self.kind = "line"
            self.s = Y[:, 0]
            return
        self.kind = "planes"
        self._build_planes(Y, rank, max_planes, rng)

    def _build_planes(self, Y, r, max_planes, rng):
        m = self.m
        total = math.comb(m, r)
        if max_planes is not None and total > max_planes:
            rng = np.random.default_rng(rng)
            subsets = np.array(sorted({tuple(sorted(rng.choice(m, r, replace=False)))
                                       for _ in range(max_planes)}), dtype=int)
            self.exact = False
        else:
            subsets = np.array(list(itertools.combinations(range(m), r)), dtype=int)
        base = Y[subsets[:, 0]]
        if r == 1:
            normals = np.ones((len(subsets), 1))
            good = np.ones(len(subsets), dtype=bool)
        else:
            D = Y[subsets[:, 1:]] - base[:, None, :]
            _, sv, Vt = np.linalg.svd(D)
            normals = Vt[:, -1, :]
            good = sv[:, -1] > GEOM_TOL * np.maximum(sv[:, 0], 1e-300)
        normals = normals[good]
        offs = np.einsum("ij,ij->i", normals, base[good])
        side = normals @ Y.T - offs[:, None]
        on = np.abs(side) <= self.tol
        _, first = np.unique(np.packbits(on, axis=1), axis=0, return_index=True)
        first.sort()
        side, on = side[first], on[first]
        self.normals, self.offs = normals[first], offs[first]
        self.L = (side < 0) & ~on
        self.R = (side > 0) & ~on
        self.G = on

    # -- batched costs ----------------------------------------------------------

    def costs(self, A, B, chunk=4096):
        """Minimum tilt count for each row of the (F, m) weight arrays."""
        A = np.asarray(A, dtype=np.float32)
        B = np.asarray(B, dtype=np.float32)
        if A.ndim == 1:
            A, B = A[None], B[None]
        Z = A * B
        if self.kind == "flat":
            return Z.sum(axis=1)
        best = np.minimum(A.sum(axis=1), B.sum(axis=1))
        if self.kind == "line":
            cost, *_ = _sweep_1d(self.s, A, B, self.tol)
            return np.minimum(best, cost)
        for lo in range(0, len(self.L), chunk):
            L = self.L[lo:lo + chunk].T.astype(np.float32)
            R = self.R[lo:lo + chunk].T.astype(np.float32)
            G = self.G[lo:lo + chunk].T.astype(np.float32)
            plus = A @ L + B @ R
            minus = B @ L + A @ R
            cand = np.minimum(plus, minus) + Z @ G
            np.minimum(best, cand.min(axis=1), out=best)
        return best

    # -- single best axis ---------------------------------------------------------

    def best(self, a, b):
        """Optimal axis for one weight pair.

        Returns ``(cost, u, v, side)`` in the original coordinates, where
        ``side`` is ``TOWARD`` when ``cost`` is the ``T+`` count of ``x'u = v``.
        """
        return self.best_many(np.atleast_2d(a), np.atleast_2d(b))[0]

    def best_many(self, A, B):
        """:meth:`best` for every row of the (F, m) weight arrays."""
        A = np.asarray(A, dtype=np.int64)
        B = np.asarray(B, dtype=np.int64)
        c = self.centre
        if self.kind == "flat":
            u = self.Vt[-1]
            return [(int(z), u, float(u @ c), TOWARD) for z in (A * B).sum(axis=1)]
        u0 = self.Vt[0]
        proj = self.X @ u0
        lo, hi = float(proj.min()), float(proj.max())
        # all points below the axis: T+ counts a, all above: T+ counts b
        out = [(int(sa), u0, hi + 1.0, TOWARD) if sa <= sb else (int(sb), u0, lo - 1.0, TOWARD)
               for sa, sb in zip(A.sum(axis=1), B.sum(axis=1))]
        if self.kind == "line":
            cost, v, use_plus = _sweep_1d(self.s, A.astype(float), B.astype(float), self.tol)
            for i in np.flatnonzero(cost < [r[0] for r in out]):
                out[i] = (int(cost[i]), u0, float(v[i] + u0 @ c),
                          TOWARD if use_plus[i] else AWAY)
            return out
        if len(self.L):
            Lf, Rf, Gf = (M.astype(np.int64) for M in (self.L, self.R, self.G))
            plus = A @ Lf.T + B @ Rf.T
            minus = B @ Lf.T + A @ Rf.T
            tot = np.minimum(plus, minus) + (A * B) @ Gf.T
            for i, h in enumerate(tot.argmin(axis=1)):
                if tot[i, h] < out[i][0]:
                    u = self.Vt[: self.rank].T @ self.normals[h]
                    out[i] = (int(tot[i, h]), u, float(self.offs[h] + u @ c),
                              TOWARD if plus[i, h] <= minus[i, h] else AWAY)
        return out


def _canonical_witness(d, count, u, v, side):
    # the first significant component of u is made positive
    u = np.asarray(u, dtype=float)
    j = int(np.flatnonzero(np.abs(u) > 1e-12)[0])
    if u[j] < 0:
        u, v = -u, -v
        side = AWAY if side == TOWARD else TOWARD
    return DepthWitness(int(count), d.n, u, float(v), side)


def _depth_budget_check(d: Dataset, budget):
    r = d.p - 1
    ops = math.comb(d.n, r) * d.n
    if budget is not None and ops > budget:
        raise BudgetExceeded(
            f"exact depth needs ~{ops:.3g} operations (C({d.n},{r}) hyperplanes); "
            "use rdepth_approx")


def kernel_for(d: Dataset, line="sweep", budget=DEFAULT_DEPTH_BUDGET, **kw):
    """Axis kernel for the design points of ``d``."""
    if line == "enumerate" or d.p > 2:
        _depth_budget_check(d, budget)
    return AxisKernel(d.X, line=line, **kw)


def rdepth_counts(d: Dataset, betas, kernel: AxisKernel | None = None) -> np.ndarray:
    """Exact depth counts for a (k, p) stack of fits."""
    betas = np.atleast_2d(_check(d, betas))
    kernel = kernel if kernel is not None else kernel_for(d)
    pos, neg = residual_signs(d, betas)
    return kernel.costs(pos, neg).astype(np.int64)


def witnesses_for(d: Dataset, betas, kernel: AxisKernel) -> list[DepthWitness]:
    """Exact witnesses for a (k, p) stack of fits sharing one kernel."""
    pos, neg = residual_signs(d, np.atleast_2d(betas))
    return [_canonical_witness(d, *r) for r in kernel.best_many(pos, neg)]


def rdepth_exact(d: Dataset, f, kernel: AxisKernel | None = None,
                 budget=DEFAULT_DEPTH_BUDGET) -> DepthWitness:
    """Exact depth by enumerating vertical hyperplanes through ``p - 1`` design points."""
    beta = _check(d, f)
    if d.p < 2:
        raise DimensionError("p must be at least 2")
    if kernel is None:
        kernel = kernel_for(d, line="enumerate", budget=budget)
    pos, neg = residual_signs(d, beta)
    count, u, v, side = kernel.best(pos.astype(int), neg.astype(int))
    return _canonical_witness(d, count, u, v, side)


def rdepth_sweep_p2(d: Dataset, f) -> DepthWitness:
    """Depth for simple regression by sorting on ``x`` and sweeping the axis."""
    beta = _check(d, f)
    if d.p != 2:
        raise DimensionError("the sweep applies to p = 2 only")
    pos, neg = residual_signs(d, beta)
    return _direction_witness(d, np.array([1.0]), pos, neg)


def _direction_witness(d, u, pos, neg):
    s = d.X @ u
    tol = GEOM_TOL * max(1.0, float(np.abs(s).max()))
    cost, v, use_plus = _sweep_1d(s, pos[None].astype(float), neg[None].astype(float), tol)
    return _canonical_witness(d, int(cost[0]), u, float(v[0]),
                              TOWARD if use_plus[0] else AWAY)


def random_directions(k: int, n_dirs: int, seed) -> np.ndarray:
    """Coordinate directions followed by ``n_dirs`` uniform unit vectors."""
    rng = np.random.default_rng(seed)
    G = rng.standard_normal((n_dirs, k))
    G /= np.linalg.norm(G, axis=1, keepdims=True)
    return np.vstack([np.eye(k), G])


def rdepth_approx(d: Dataset, f, n_dirs: int = 100, seed=0) -> DepthWitness:
    """Upper bound on the depth from random projection directions.

    Each direction (and each coordinate axis) is swept exactly, so the result
    is the true minimum over the sampled directions and never below the exact
    count.
    """
    if n_dirs < 1:
        raise ValueError("n_dirs must be positive")
    beta = _check(d, f)
    pos, neg = residual_signs(d, beta)
    best = None
    for u in random_directions(d.p - 1, n_dirs, seed):
        w = _direction_witness(d, u, pos, neg)
        if best is None or w.count < best.count:
            best = w
    return best


def rdepth_approx_counts(d: Dataset, betas, n_dirs: int = 100, seed=0) -> np.ndarray:
    """Batched :func:`rdepth_approx` counts for a (k, p) stack of fits."""
    betas = np.atleast_2d(_check(d, betas))
    pos, neg = residual_signs(d, betas)
    A, B = pos.astype(np.float32), neg.astype(np.float32)
    best = np.minimum(A.sum(axis=1), B.sum(axis=1))
    for s in random_directions(d.p - 1, n_dirs, seed) @ d.X.T:
        tol = GEOM_TOL * max(1.0, float(np.abs(s).max()))
        cost, *_ = _sweep_1d(s, A, B, tol)
        np.minimum(best, cost, out=best)
    return best.astype(np.int64)


# --- tilt-simulation oracle ------------------------------------------------------

ORACLE_MAX_N = {2: 20, 3: 12}


def _oracle_directions(X2):
    """Critical directions (normal to a pair of points) and one direction
    strictly between each consecutive pair of critical angles."""
    crit = []
    for i, j in itertools.combinations(range(len(X2)), 2):
        dx, dy = X2[j] - X2[i]
        if math.hypot(dx, dy) > 1e-12:
            a = math.atan2(dy, dx) + math.pi / 2
            crit += [a % (2 * math.pi), (a + math.pi) % (2 * math.pi)]
    if not crit:
        return [np.array([1.0, 0.0])]
    crit = np.unique(np.round(crit, 14))
    nxt = np.r_[crit[1:], crit[0] + 2 * math.pi]
    angles = np.r_[crit, (crit + nxt) / 2]
    return [np.array([math.cos(t), math.sin(t)]) for t in angles]


def _swept(phi, start, end, ccw):
    """Is the line angle ``phi`` (mod pi) met while rotating from ``start``
    up to, but excluding, ``end``?"""
    if ccw:
        span, off = (end - start) % math.pi, (phi - start) % math.pi
    else:
        span, off = (start - end) % math.pi, (start - phi) % math.pi
    if off > math.pi - 1e-9:
        off = 0.0
    return off < span - 1e-9


def rdepth_oracle(d: Dataset, f) -> int:
    """Brute-force depth by simulating the tilt about candidate axes.

    The design is embedded in the plane (a zero second coordinate when
    ``p = 2``). For every critical or generic direction and every axis
    position at, between and beyond the projections, the fit's plane is
    rotated about its intersection line with the vertical plane, both ways,
    and the data points whose dihedral angle is swept are counted. Points on
    the axis line are touched at the start; other points of the vertical
    plane are only reached at the end and are not counted.
    """
    beta = _check(d, f)
    if d.n > ORACLE_MAX_N.get(d.p, 0):
        raise ValueError(f"oracle limited to p <= 3 with n <= {ORACLE_MAX_N}")
    X2 = np.zeros((d.n, 2))
    X2[:, : d.p - 1] = d.X
    b1 = float(beta[0])
    b2 = np.zeros(2)
    b2[: d.p - 1] = beta[1:]
    Z = np.column_stack([X2, d.y])
    best = d.n
    up = np.array([0.0, 0.0, 1.0])
    scale = 1.0 + np.abs(Z).max()
    dirs = _oracle_directions(X2) if d.p == 3 else [np.array([1.0, 0.0])]
    for u in dirs:
        s = np.unique(np.round(X2 @ u, 12))
        cuts = np.r_[s[0] - 1.0, s, (s[1:] + s[:-1]) / 2, s[-1] + 1.0]
        t = np.array([-u[1], u[0]])
        axis = np.r_[t, b2 @ t]
        axis /= np.linalg.norm(axis)
        e1 = np.r_[u, 0.0]
        e2 = np.cross(axis, e1)

        def perp(vec):
            return vec - (vec @ axis) * axis

        def angle(vec):
            return math.atan2(vec @ e2, vec @ e1) % math.pi

        normal = np.r_[-b2, 1.0]
        start = angle(perp(np.cross(normal, axis)))
        end = angle(up)
        for v in cuts:
            x0 = v * u
            origin = np.r_[x0, b1 + b2 @ x0]
            ccw = cw = 0
            for z in Z:
                w = perp(z - origin)
                if np.linalg.norm(w) <= 1e-9 * scale:
                    ccw += 1
                    cw += 1
                    continue
                ph = angle(w)
                ccw += _swept(ph, start, end, True)
                cw += _swept(ph, start, end, False)
            best = min(best, ccw, cw)
    return int(best)


def fit_as_fit(f) -> Fit:
    return f if isinstance(f, Fit) else Fit(f)
