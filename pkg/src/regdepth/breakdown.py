"""Breakdown-point bounds of the deepest-fit median and the contamination
attacks that realise them.

With ``k*`` the maximum depth count and ``m = k* - p + 1``:

    addition breakdown point       m / (n + m)
    replacement upper bound        m / n
    lower bound from max depth     (ceil(n / (p + 1)) - p + 1) / n
    equivariant estimators         (n - p + 1) / (2n - p + 1)

All bounds are exact rationals. The attacks place ``m`` identical points far
up a vertical hyperplane through ``p - 1`` design points, so that a nearly
vertical fit joins the set of deepest fits and drags their average away.
"""
from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .core import Dataset, DegenerateSubset, fits_through_subsets
from .depth import rdepth_counts
from .median import DeepestFitResult, deepest_fit, k_star_exact

ASYMPTOTIC_REF = Fraction(1, 3)
Y_LEVELS = (1e2, 1e4, 1e6)
GROWTH_RATIO = 50.0

ADDITION = "addition"
REPLACEMENT = "replacement"


class AttackConstructionFailed(RuntimeError):
    """No verified placement was found within the retry budget."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or []


def _rational(q: Fraction) -> dict:
    return {"num": q.numerator, "den": q.denominator,
            "fraction": f"{q.numerator}/{q.denominator}", "decimal": f"{float(q):.17g}"}


@dataclass(frozen=True)
class BreakdownBounds:
    n: int
    p: int
    k_star: int
    m_min: int
    abp_exact: Fraction
    rbp_ub: Fraction
    rh99_lb: Fraction
    equivariant_ub: Fraction
    asymptotic_ref: Fraction = ASYMPTOTIC_REF
    flags: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "p": self.p,
            "k_star": self.k_star,
            "m_min": self.m_min,
            "abp_exact": _rational(self.abp_exact),
            "rbp_ub": _rational(self.rbp_ub),
            "rh99_lb": _rational(self.rh99_lb),
            "equivariant_ub": _rational(self.equivariant_ub),
            "asymptotic_ref": _rational(self.asymptotic_ref),
            "flags": list(self.flags),
        }


def depth_lower_bound(n: int, p: int) -> int:
    """``ceil(n / (p + 1))``, the guaranteed maximum depth count."""
    return -(-n // (p + 1))


def bounds_from_k(n: int, p: int, k_star: int, approximate: bool = False) -> BreakdownBounds:
    """Fill every bound from ``(n, p, k*)``."""
    if not (2 <= p <= n):
        raise ValueError("need 2 <= p <= n")
    if not (0 <= k_star <= n):
        raise ValueError("k_star must lie in [0, n]")
    m = k_star - p + 1
    lb = Fraction(depth_lower_bound(n, p) - p + 1, n)
    flags = []
    if lb <= 0:
        flags.append("rh99_lb_uninformative")
    if lb < 0:
        flags.append("rh99_lb_negative")
    if m < 1:
        flags.append("k_star_below_p")
    if approximate:
        flags.append("k_star_approximate")
    return BreakdownBounds(
        n=n, p=p, k_star=k_star, m_min=m,
        abp_exact=Fraction(m, n + m) if n + m else Fraction(0),
        rbp_ub=Fraction(m, n),
        rh99_lb=lb,
        equivariant_ub=Fraction(n - p + 1, 2 * n - p + 1),
        flags=tuple(flags),
    )


def bounds_report(d: Dataset, depth_mode: str = "exact", **kw) -> BreakdownBounds:
    """Bounds for ``d`` with ``k*`` from the median module.

    ``depth_mode`` is ``"exact"``, ``"approx"`` or ``"auto"``; keyword
    arguments go to the median routine.
    """
    kw.setdefault("witnesses", False)
    res = deepest_fit(d, mode=depth_mode, **kw)
    return bounds_from_k(d.n, d.p, res.k_star, approximate=res.mode != "exact")


# --- vertical-mass attacks ---------------------------------------------------------


@dataclass(frozen=True, eq=False)
class AttackPlan:
    """A contamination and the evidence that it breaks the estimator.

    For the vertical-mass kinds ``site_z`` is the point ``(x, y)`` receiving
    all ``m`` contaminating observations and ``anchor_indices`` are the
    ``p - 1`` design points whose x-flat carries it. For ``nullspace_pair``
    ``site_z`` is the shift ``b``.
    """

    kind: str
    site_z: np.ndarray
    m: int
    anchor_indices: tuple[int, ...] = ()
    replaced_indices: tuple[int, ...] = ()
    beta_c: np.ndarray | None = None
    k_star: int | None = None
    t_star: np.ndarray | None = None
    tries: int = 0
    notes: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        def vec(a):
            return None if a is None else [float(c) for c in np.ravel(a)]

        return {
            "kind": self.kind,
            "site_z": vec(self.site_z),
            "m": int(self.m),
            "anchor_indices": [int(i) for i in self.anchor_indices],
            "replaced_indices": [int(i) for i in self.replaced_indices],
            "beta_c": vec(self.beta_c),
            "k_star": None if self.k_star is None else int(self.k_star),
            "t_star": vec(self.t_star),
            "tries": int(self.tries),
            **({"notes": self.notes} if self.notes else {}),
        }


def certificate(d: Dataset) -> float:
    """Largest norm among fits through ``p`` original observations.

    Deepest fits built from original points only never leave this ball.
    """
    subsets = np.array(list(itertools.combinations(range(d.n), d.p)), dtype=int)
    betas, ok = fits_through_subsets(d, subsets)
    return float(np.linalg.norm(betas[ok], axis=1).max())


def contaminate(d: Dataset, x, y, m: int, mode: str = ADDITION, replace=()) -> Dataset:
    """``m`` copies of ``(x, y)`` added to ``d`` or written over rows ``replace``."""
    x = np.asarray(x, dtype=float).reshape(1, -1)
    if mode == ADDITION:
        return d.append(np.repeat(x, m, axis=0), np.full(m, float(y)))
    replace = list(replace)
    if len(replace) != m:
        raise ValueError("replacement needs exactly m indices")
    X, yy = d.X.copy(), d.y.copy()
    X[replace] = x
    yy[replace] = y
    return Dataset(X, yy, d.label)


def _flat_point(d, anchors, rng):
    """A random point of the affine flat through the anchor x-points."""
    A = d.X[list(anchors)]
    if len(anchors) == 1:
        return A[0].copy()
    w = rng.standard_normal(len(anchors))
    w = w / w.sum() if abs(w.sum()) > 0.1 else np.full(len(anchors), 1 / len(anchors))
    return w @ A


def _placements(d, rng, max_tries):
    """Candidate (anchors, x, sign) triples in a seeded random order."""
    n, p = d.n, d.p
    if p == 2:
        cands = [((i,), s) for i in range(n) for s in (1.0, -1.0)]
        for j in rng.permutation(len(cands))[:max_tries]:
            anchors, s = cands[j]
            yield anchors, d.X[anchors[0]].copy(), s
        return
    for _ in range(max_tries):
        anchors = tuple(sorted(int(i) for i in rng.choice(n, p - 1, replace=False)))
        yield anchors, _flat_point(d, anchors, rng), float(rng.choice([1.0, -1.0]))


def _through(res: DeepestFitResult, x, y):
    """Maximisers passing through ``(x, y)``."""
    out = []
    for mx in res.maximizers:
        r = y - mx.fit.predict(np.reshape(x, (1, -1)))[0]
        if abs(r) <= 1e-9 * (1 + abs(y) + np.linalg.norm(mx.fit.beta) * (1 + np.linalg.norm(x))):
            out.append(mx)
    return out


def _vertical_mass(d, y_magnitude, seed, mode, max_tries, base):
    if y_magnitude <= 0:
        raise ValueError("y_magnitude must be positive")
    base = base if base is not None else k_star_exact(d, witnesses=False)
    k, n, p = base.k_star, d.n, d.p
    m = k - p + 1
    rng = np.random.default_rng(seed)
    diagnostics = []
    for t, (anchors, x, sign) in enumerate(_placements(d, rng, max_tries), start=1):
        y = sign * y_magnitude
        replaced = ()
        if mode == REPLACEMENT:
            others = np.setdiff1d(np.arange(n), anchors)
            replaced = tuple(sorted(int(i) for i in rng.choice(others, m, replace=False)))
        c = contaminate(d, x, y, m, mode, replaced)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            res = k_star_exact(c, witnesses=False, check_position=False)
        hits = _through(res, x, y)
        diagnostics.append({"anchors": list(anchors), "y": y, "k_star": res.k_star,
                            "through_site": len(hits)})
        if res.k_star != k or not hits:
            continue
        beta_c = max(hits, key=lambda mx: np.linalg.norm(mx.fit.beta)).fit.beta
        if int(rdepth_counts(c, beta_c[None])[0]) != k:
            continue
        plan = AttackPlan(
            kind=f"{mode}_vertical_mass", site_z=np.r_[x, y], m=m,
            anchor_indices=anchors, replaced_indices=replaced, beta_c=beta_c,
            k_star=res.k_star, t_star=res.t_star.beta, tries=t)
        return plan, c
    raise AttackConstructionFailed(
        f"{mode} attack with m={m} not verified after {len(diagnostics)} placements "
        f"(original k*={k})", diagnostics)


def attack_addition(d: Dataset, y_magnitude: float, seed, *, max_tries: int = 100,
                    base: DeepestFitResult | None = None):
    """Add ``m = k* - p + 1`` copies of a far point on a vertical anchor flat.

    The site's x lies on the flat through ``p - 1`` design points and its
    ``y`` is ``+-y_magnitude``. A placement is accepted once the exact median
    of the enlarged data keeps the original ``k*`` and one of its maximisers,
    ``beta_c``, passes through the site with depth count ``k*``.

    Returns
    -------
    plan : AttackPlan
    contaminated : Dataset

    Raises
    ------
    AttackConstructionFailed
        When no placement verifies within ``max_tries``.
    """
    return _vertical_mass(d, y_magnitude, seed, ADDITION, max_tries, base)


def attack_replacement(d: Dataset, y_magnitude: float, seed, *, max_tries: int = 100,
                       base: DeepestFitResult | None = None):
    """Replace ``m = k* - p + 1`` non-anchor observations by a far point.

    Same construction and verification as :func:`attack_addition`, the
    sample size staying ``n``.
    """
    return _vertical_mass(d, y_magnitude, seed, REPLACEMENT, max_tries, base)


# --- null-space pair -------------------------------------------------------------


def null_direction(W) -> np.ndarray:
    """Unit vector spanning the null space of ``W`` (one dimension expected)."""
    W = np.atleast_2d(np.asarray(W, dtype=float))
    p = W.shape[1]
    _, sv, Vt = np.linalg.svd(W, full_matrices=True)
    rank = int(np.count_nonzero(sv > 1e-12 * max(1.0, sv.max(initial=0.0))))
    if p - rank != 1:
        raise DegenerateSubset(f"null space has dimension {p - rank}, expected 1")
    u = Vt[-1]
    j = int(np.flatnonzero(np.abs(u) > 1e-12)[0])
    return u if u[j] > 0 else -u


def attack_nullspace_pair(d: Dataset, lam: float):
    """The two ``m = n - p + 1`` additions no equivariant estimator can tell apart.

    With ``u`` orthogonal to ``(1, x_i')`` for the last ``p - 1`` rows and
    ``b = lam * u``, the first set appends the first ``m`` rows shifted up by
    ``(1, x_i')b``; the second shifts those rows down and appends their
    originals. Subtracting ``(1, x')b`` from every response of the first set
    gives the second, so their estimates differ by exactly ``b``.

    Returns
    -------
    plan : AttackPlan
    pair : (Dataset, Dataset)
    """
    n, p = d.n, d.p
    m = n - p + 1
    W = d.design
    u = null_direction(W[m:])
    b = lam * u
    shift = W[:m] @ b
    first = d.append(d.X[:m], d.y[:m] + shift)
    y2 = d.y.copy()
    y2[:m] -= shift
    second = Dataset(d.X, y2, d.label).append(d.X[:m], d.y[:m])
    plan = AttackPlan(kind="nullspace_pair", site_z=b, m=m,
                      anchor_indices=tuple(range(m, n)))
    return plan, (first, second)


# --- empirical search ------------------------------------------------------------


def _battery(d, m, mode, rng, max_sites):
    """Deterministically ordered contamination strategies with ``m`` points.

    Each strategy maps a magnitude ``y`` to a contaminated dataset.
    """
    n, p = d.n, d.p
    strategies = []
    if m < 1:
        return strategies
    if mode == REPLACEMENT and m > n:
        return strategies

    def pick_replaced(exclude):
        pool = np.setdiff1d(np.arange(n), exclude)
        if len(pool) < m:
            pool = np.arange(n)
        return tuple(sorted(int(i) for i in rng.choice(pool, m, replace=False)))

    # vertical mass above anchor flats
    if p == 2:
        sites = [((i,), d.X[i].copy()) for i in range(n)]
    else:
        sites = []
        for anchors in itertools.islice(itertools.combinations(range(n), p - 1), max_sites):
            sites.append((anchors, _flat_point(d, anchors, rng)))
    for anchors, x in sites[:max_sites]:
        replaced = pick_replaced(anchors) if mode == REPLACEMENT else ()
        for sign in (1.0, -1.0):
            strategies.append((
                {"kind": "vertical_mass", "anchors": list(anchors), "sign": sign},
                lambda y, x=x, s=sign, r=replaced: contaminate(d, x, s * y, m, mode, r)))
    # null-space shifts of m observations keeping p - 1 others fixed
    W = d.design
    if n - m >= p - 1:
        for start in range(0, n, max(1, n // 4)):
            fixed = [(start + j) % n for j in range(p - 1)]
            moved = [i for i in range(n) if i not in fixed][:m]
            if len(moved) < m:
                continue
            try:
                u = null_direction(W[fixed])
            except DegenerateSubset:
                continue
            for sign in (1.0, -1.0):
                def make(y, u=u, s=sign, moved=moved):
                    shift = W[moved] @ (s * y * u)
                    if mode == ADDITION:
                        return d.append(d.X[moved], d.y[moved] + shift)
                    yy = d.y.copy()
                    yy[moved] += shift
                    return Dataset(d.X, yy, d.label)
                strategies.append(({"kind": "nullspace_shift", "fixed": fixed, "sign": sign},
                                   make))
    # far points along the coordinate axes
    for j in range(p - 1):
        for sx, sy in ((1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)):
            e = np.zeros(p - 1)
            e[j] = sx
            replaced = pick_replaced(()) if mode == REPLACEMENT else ()
            strategies.append((
                {"kind": "axis_far_point", "axis": j, "sign_x": sx, "sign_y": sy},
                lambda y, e=e, sy=sy, r=replaced: contaminate(d, e * y, sy * y, m, mode, r)))
    return strategies


def _t_norm(c):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return float(np.linalg.norm(
            k_star_exact(c, witnesses=False, check_position=False).t_star.beta))


def breaks_down(make, bound, y_levels=Y_LEVELS, ratio=GROWTH_RATIO):
    """Apply the divergence test to one strategy.

    The norm of the median must exceed ``bound`` at the largest magnitude and
    grow by at least ``ratio`` between consecutive magnitudes (100-fold
    steps), i.e. at least linearly in ``y``.

    Returns
    -------
    (bool, list of norms)
    """
    top = _t_norm(make(y_levels[-1]))
    if top <= bound:
        return False, [top]
    norms = [_t_norm(make(y)) for y in y_levels[:-1]] + [top]
    ok = all(b >= ratio * max(a, 1e-300) for a, b in zip(norms, norms[1:]))
    return ok, norms


@dataclass(frozen=True)
class SearchResult:
    m_emp: int
    strategy: dict | None
    norms: list
    certificate: float
    evaluated: int

    def to_dict(self) -> dict:
        return {"m_emp": self.m_emp, "strategy": self.strategy, "norms": self.norms,
                "certificate": self.certificate, "evaluated": self.evaluated}


def empirical_breakdown_search(d: Dataset, mode: str = ADDITION, m_max: int | None = None,
                               seed=0, max_sites: int = 40) -> SearchResult:
    """Smallest ``m <= m_max`` for which some battery strategy breaks the median.

    The battery holds vertical mass above anchor flats, null-space shifts of
    ``m`` observations and far points along the coordinate axes, each at both
    signs. A strategy succeeds when :func:`breaks_down` accepts it against the
    certificate of :func:`certificate`. Returns ``m_max + 1`` when nothing
    succeeds.
    """
    if mode not in (ADDITION, REPLACEMENT):
        raise ValueError("mode must be 'addition' or 'replacement'")
    if m_max is None:
        m_max = d.n
    bound = certificate(d)
    evaluated = 0
    for m in range(1, m_max + 1):
        rng = np.random.default_rng([int(seed), m])
        for info, make in _battery(d, m, mode, rng, max_sites):
            evaluated += 1
            ok, norms = breaks_down(make, bound)
            if ok:
                return SearchResult(m, {**info, "m": m}, norms, bound, evaluated)
    return SearchResult(m_max + 1, None, [], bound, evaluated)


def max_norm_below(d: Dataset, m: int, mode: str = ADDITION, seed=0, max_sites: int = 40,
                   y_levels=Y_LEVELS) -> float:
    """Largest ``||t*||`` reached by any battery strategy with ``m`` points."""
    rng = np.random.default_rng([int(seed), m])
    worst = 0.0
    for _, make in _battery(d, m, mode, rng, max_sites):
        for y in y_levels:
            worst = max(worst, _t_norm(make(y)))
    return worst
