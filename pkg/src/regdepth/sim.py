"""Seeded data generators and the Monte Carlo tables of breakdown bounds.

Randomness comes from a counter-based SplitMix64 stream so that fixtures
regenerate bit for bit on any platform:

    state_i = seed + i * 0x9E3779B97F4A7C15        (i = 1, 2, ...; mod 2**64)
    z_i     = mix64(state_i)
    u_i     = ((z_i >> 11) + 0.5) / 2**53            uniform on (0, 1)
    g_i     = Phi^{-1}(u_i)                          standard normal

where ``mix64`` is the SplitMix64 finaliser. The seed of replicate ``i`` of
cell ``(p, n)`` is ``mix64(master ^ mix64((p << 32) | n) ^ i)``, so every
replicate can be generated independently of the others.
"""
from __future__ import annotations

import csv
import io
import json
import logging
import math
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np
from scipy.special import ndtri

from .breakdown import ASYMPTOTIC_REF, depth_lower_bound
from .core import Dataset
from .median import k_star_approx, k_star_exact

log = logging.getLogger(__name__)

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB

STD_NORMAL = "std_normal"
CONTAMINATED = "diag_normal_contaminated"
CONTAMINATION_RATE = 0.05
CONTAMINANT_MEAN = 10.0
CONTAMINANT_VAR = 0.1

TABLES = {
    "table1": (STD_NORMAL, "abp_minus_rh99"),
    "table2": (CONTAMINATED, "abp_minus_rh99"),
    "table3": (STD_NORMAL, "rbp_minus_third"),
}


# --- random stream -----------------------------------------------------------------


def mix64(x: int) -> int:
    """SplitMix64 finaliser on a Python integer."""
    z = x & MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def _mix64_array(z: np.ndarray) -> np.ndarray:
    z = z ^ (z >> np.uint64(30))
    z = z * np.uint64(_M1)
    z = z ^ (z >> np.uint64(27))
    z = z * np.uint64(_M2)
    return z ^ (z >> np.uint64(31))


def raw_stream(seed: int, count: int, offset: int = 0) -> np.ndarray:
    """``count`` SplitMix64 outputs starting after ``offset`` draws."""
    i = np.arange(offset + 1, offset + count + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        state = np.uint64(seed & MASK64) + i * np.uint64(GOLDEN)
        return _mix64_array(state)


def uniform_stream(seed: int, count: int, offset: int = 0) -> np.ndarray:
    z = raw_stream(seed, count, offset)
    return ((z >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53


def normal_stream(seed: int, count: int, offset: int = 0) -> np.ndarray:
    return ndtri(uniform_stream(seed, count, offset))


def replicate_seed(master: int, p: int, n: int, index: int) -> int:
    return mix64((master & MASK64) ^ mix64((p << 32) | n) ^ index)


# --- generators ----------------------------------------------------------------------


def _as_dataset(Z, p, label):
    return Dataset(Z[:, : p - 1], Z[:, p - 1], label)


def gen_std_normal(p: int, n: int, seed: int) -> Dataset:
    """``n`` draws of ``(x', y)`` with all ``p`` coordinates i.i.d. N(0, 1)."""
    if p < 2 or n < p:
        raise ValueError("need p >= 2 and n >= p")
    Z = normal_stream(seed, n * p).reshape(n, p)
    return _as_dataset(Z, p, f"std_normal p={p} n={n} seed={seed}")


def n_contaminated(n: int) -> int:
    return math.ceil(CONTAMINATION_RATE * n - 1e-12)


def gen_contaminated(p: int, n: int, seed: int, scheme: str = "replace") -> Dataset:
    """Diagonal-covariance normal sample with 5% outlying points.

    Coordinate ``j`` (the response being the last) has variance ``j``. With
    ``scheme="replace"`` the last ``ceil(0.05 n)`` rows are replaced by points
    whose coordinates are independent N(10, 0.1); with ``scheme="add"`` those
    points are appended instead, giving ``n + ceil(0.05 n)`` rows.
    """
    if p < 2 or n < p:
        raise ValueError("need p >= 2 and n >= p")
    if scheme not in ("replace", "add"):
        raise ValueError("scheme must be 'replace' or 'add'")
    k = n_contaminated(n)
    Z = normal_stream(seed, n * p).reshape(n, p) * np.sqrt(np.arange(1, p + 1))
    C = CONTAMINANT_MEAN + math.sqrt(CONTAMINANT_VAR) * normal_stream(
        seed, k * p, offset=n * p).reshape(k, p)
    if scheme == "add":
        Z = np.vstack([Z, C])
    elif k:
        Z[n - k:] = C
    return _as_dataset(Z, p, f"contaminated({scheme}) p={p} n={n} seed={seed}")


GENERATORS = {STD_NORMAL: gen_std_normal, CONTAMINATED: gen_contaminated}


# --- experiments ---------------------------------------------------------------------


def auto_mode(p: int, n: int) -> str:
    """Exact enumeration where it stays at desk scale, sampling beyond."""
    if (p >= 3 and n > 30) or (p >= 5 and n > 20):
        return "approx"
    return "exact"


@dataclass(frozen=True)
class SimulationSpec:
    p: int
    n: int
    reps: int = 1000
    generator: str = STD_NORMAL
    depth_mode: str = "auto"
    master_seed: int = 0
    n_subsets: int = 2000
    n_dirs: int = 200
    time_budget: float | None = None

    def __post_init__(self):
        if self.reps < 1:
            raise ValueError("reps must be at least 1")
        if self.generator not in GENERATORS:
            raise ValueError(f"unknown generator {self.generator!r}")
        if self.depth_mode not in ("exact", "approx", "auto"):
            raise ValueError("depth_mode must be exact, approx or auto")

    @property
    def mode(self) -> str:
        return auto_mode(self.p, self.n) if self.depth_mode == "auto" else self.depth_mode


@dataclass(frozen=True)
class Replicate:
    index: int
    seed: int
    k_star: int
    mode: str

    def bounds(self, n, p):
        m = self.k_star - p + 1
        return (Fraction(m, n + m), Fraction(m, n),
                Fraction(depth_lower_bound(n, p) - p + 1, n))


@dataclass(frozen=True, eq=False)
class SimulationSummary:
    spec: SimulationSpec
    table: str
    replicates: list[Replicate]
    complete: bool
    elapsed: float = 0.0
    notes: dict = field(default_factory=dict)

    @property
    def reps_done(self) -> int:
        return len(self.replicates)

    @property
    def mode(self) -> str:
        modes = {r.mode for r in self.replicates}
        return modes.pop() if len(modes) == 1 else "mixed"

    def _values(self):
        n, p = self.spec.n, self.spec.p
        return [r.bounds(n, p) for r in self.replicates]

    def column(self, name: str) -> np.ndarray:
        idx = {"abp_lb": 0, "rbp_ub": 1, "rh99_lb": 2}[name]
        return np.array([float(v[idx]) for v in self._values()])

    def mean_pp(self, statistic: str) -> float:
        """Mean difference in percentage points, summed exactly."""
        if not self.replicates:
            return float("nan")
        vals = self._values()
        if statistic == "abp_minus_rh99":
            total = sum((a - lb for a, _, lb in vals), Fraction(0))
        elif statistic == "rbp_minus_third":
            total = sum((r - ASYMPTOTIC_REF for _, r, _ in vals), Fraction(0))
        else:
            raise ValueError(f"unknown statistic {statistic!r}")
        return float(100 * total / len(vals))

    @property
    def statistic(self) -> str:
        return TABLES[self.table][1]

    @property
    def value_pp(self) -> float:
        return self.mean_pp(self.statistic)

    def to_dict(self) -> dict:
        return {
            "table": self.table,
            "spec": asdict(self.spec),
            "mode": self.mode,
            "reps_requested": self.spec.reps,
            "reps_done": self.reps_done,
            "complete": self.complete,
            "statistic": self.statistic,
            "mean_pp": self.value_pp,
            "mean_abp_minus_rh99_pp": self.mean_pp("abp_minus_rh99"),
            "mean_rbp_minus_third_pp": self.mean_pp("rbp_minus_third"),
            "mean_k_star": float(np.mean([r.k_star for r in self.replicates]))
            if self.replicates else float("nan"),
            "contamination": "replace last ceil(0.05 n) rows by independent N(10, 0.1) "
                             "coordinates" if self.spec.generator == CONTAMINATED else None,
        }

    def replicate_rows(self) -> list[dict]:
        n, p = self.spec.n, self.spec.p
        rows = []
        for r in self.replicates:
            abp, rbp, lb = r.bounds(n, p)
            rows.append({"p": p, "n": n, "replicate": r.index, "seed": r.seed,
                         "k_star": r.k_star, "abp_lb": repr(float(abp)),
                         "rbp_ub": repr(float(rbp)), "rh99_lb": repr(float(lb)),
                         "mode": r.mode})
        return rows


def run_replicate(spec: SimulationSpec, index: int) -> Replicate:
    seed = replicate_seed(spec.master_seed, spec.p, spec.n, index)
    d = GENERATORS[spec.generator](spec.p, spec.n, seed)
    mode = spec.mode
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        if mode == "exact":
            res = k_star_exact(d, witnesses=False, check_position=False)
        else:
            res = k_star_approx(d, n_subsets=spec.n_subsets, n_dirs=spec.n_dirs, seed=seed)
    return Replicate(index, seed, res.k_star, res.mode)


def run_table_experiment(spec: SimulationSpec, which: str = "table1",
                         workers: int = 1) -> SimulationSummary:
    """Run ``spec.reps`` replicates and aggregate them for one table.

    Replicates are independent; the summary is identical for any number of
    workers. With ``spec.time_budget`` set, no new replicate starts once the
    budget is spent and the summary is marked incomplete.
    """
    if which not in TABLES:
        raise ValueError(f"unknown table {which!r}")
    generator = TABLES[which][0]
    if spec.generator != generator:
        raise ValueError(f"{which} uses the {generator} generator")
    t0 = time.perf_counter()
    deadline = None if spec.time_budget is None else t0 + spec.time_budget
    done: list[Replicate] = []
    batch = max(1, workers) * 4
    index = 0
    with ThreadPoolExecutor(max(1, workers)) as pool:
        while index < spec.reps:
            if deadline is not None and time.perf_counter() > deadline:
                break
            hi = min(spec.reps, index + batch)
            done.extend(pool.map(lambda i: run_replicate(spec, i), range(index, hi)))
            index = hi
    complete = len(done) == spec.reps
    if not complete:
        log.warning("time budget spent after %d of %d replicates", len(done), spec.reps)
    return SimulationSummary(spec, which, done, complete, time.perf_counter() - t0)


# --- output --------------------------------------------------------------------------

REPLICATE_FIELDS = ["p", "n", "replicate", "seed", "k_star", "abp_lb", "rbp_ub",
                    "rh99_lb", "mode"]


def replicates_csv(summaries) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, REPLICATE_FIELDS, lineterminator="\n")
    w.writeheader()
    for s in summaries:
        w.writerows(s.replicate_rows())
    return buf.getvalue()


def table_csv(summaries) -> str:
    """Grid with one row per ``(p, quantity)`` and one column per ``n``."""
    ns = sorted({s.spec.n for s in summaries})
    ps = sorted({s.spec.p for s in summaries})
    cell = {(s.spec.p, s.spec.n): s for s in summaries}
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["p", "quantity"] + [f"n={n}" for n in ns])
    for p in ps:
        for q in ("mean_pp", "mode", "reps"):
            row = [p, q]
            for n in ns:
                s = cell.get((p, n))
                if s is None:
                    row.append("")
                elif q == "mean_pp":
                    row.append(f"{s.value_pp:.3f}")
                elif q == "mode":
                    row.append(s.mode)
                else:
                    row.append(s.reps_done)
            w.writerow(row)
    return buf.getvalue()


def summaries_json(summaries) -> str:
    return json.dumps([s.to_dict() for s in summaries], indent=2)


# --- boxplots ------------------------------------------------------------------------


@dataclass(frozen=True)
class BoxStats:
    p: int
    n: int
    q1: float
    median: float
    q3: float
    whisker_lo: float
    whisker_hi: float
    outliers: list
    mean: float
    reps: int
    mode: str

    @property
    def below_third(self) -> bool:
        return self.median < float(ASYMPTOTIC_REF)

    def to_dict(self) -> dict:
        return {**asdict(self), "median_below_one_third": self.below_third}


def box_stats(values, p=0, n=0, mode="exact") -> BoxStats:
    """Quartiles (linear interpolation) and 1.5 IQR whiskers."""
    v = np.sort(np.asarray(values, dtype=float))
    q1, med, q3 = np.percentile(v, [25, 50, 75])
    iqr = q3 - q1
    inside = v[(v >= q1 - 1.5 * iqr) & (v <= q3 + 1.5 * iqr)]
    out = v[(v < q1 - 1.5 * iqr) | (v > q3 + 1.5 * iqr)]
    return BoxStats(p, n, float(q1), float(med), float(q3), float(inside.min()),
                    float(inside.max()), [float(x) for x in out], float(v.mean()),
                    len(v), mode)


def boxplot_summary(ps=(2, 3, 5), ns=(10, 20, 30, 50, 100, 200), reps: int = 1000,
                    master_seed: int = 0, workers: int = 1, **spec_kw) -> list[BoxStats]:
    """Five-number summaries of the replacement upper bound ``(k* - p + 1) / n``."""
    cells = []
    for p in ps:
        for n in ns:
            spec = SimulationSpec(p, n, reps, STD_NORMAL, master_seed=master_seed, **spec_kw)
            s = run_table_experiment(spec, "table3", workers)
            cells.append(box_stats(s.column("rbp_ub"), p, n, s.mode))
    return cells
