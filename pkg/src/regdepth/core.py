"""Datasets, fits, residuals and the small exact linear algebra shared by the
depth, median and breakdown modules.

A dataset holds ``n`` observations ``(x_i, y_i)`` with ``x_i`` in R^(p-1); a
candidate fit is ``beta = (intercept, slope_1, ..., slope_{p-1})`` and predicts
``y = (1, x') beta``.
"""
from __future__ import annotations

import csv
import io
import itertools
from dataclasses import dataclass, field
from math import comb
from typing import NamedTuple

import numpy as np

ZERO_RTOL = 1e-9
PIVOT_TOL = 1e-12


class DimensionError(ValueError):
    """Inconsistent shapes between a dataset and a fit or index set."""


class DegenerateSubset(ValueError):
    """The selected points do not determine a unique non-vertical hyperplane."""


class BudgetExceeded(RuntimeError):
    """An exact enumeration would exceed the configured work budget."""


@dataclass(frozen=True, eq=False)
class Dataset:
    """``n`` observations with design points ``X`` (n, p-1) and responses ``y``.

    Row order is significant: every index reported by this package refers to
    it.
    """

    X: np.ndarray
    y: np.ndarray
    label: str = ""

    def __post_init__(self):
        X = np.array(self.X, dtype=float)
        y = np.array(self.y, dtype=float).reshape(-1)
        if X.ndim == 1:
            X = X.reshape(-1, 1)
        if X.ndim != 2 or X.shape[0] != y.shape[0]:
            raise DimensionError(f"X has shape {X.shape} but y has {y.shape[0]} rows")
        if X.shape[1] < 1:
            raise DimensionError("need at least one regressor (p >= 2)")
        if X.shape[0] < X.shape[1] + 1:
            raise DimensionError(f"n={X.shape[0]} < p={X.shape[1] + 1}")
        if not (np.isfinite(X).all() and np.isfinite(y).all()):
            raise ValueError("non-finite coordinates")
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @classmethod
    def from_points(cls, points, label: str = "") -> "Dataset":
        """Build from rows ``(x_1, ..., x_{p-1}, y)``."""
        arr = np.asarray(points, dtype=float)
        if arr.ndim != 2 or arr.shape[1] < 2:
            raise DimensionError("points must be rows of (x_1, ..., x_{p-1}, y)")
        return cls(arr[:, :-1], arr[:, -1], label)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1] + 1

    @property
    def design(self) -> np.ndarray:
        """Rows ``w_i = (1, x_i')``."""
        return np.column_stack([np.ones(self.n), self.X])

    def points(self) -> np.ndarray:
        return np.column_stack([self.X, self.y])

    def take(self, idx) -> "Dataset":
        idx = np.asarray(idx, dtype=int)
        return Dataset(self.X[idx], self.y[idx], self.label)

    def append(self, X, y, label: str | None = None) -> "Dataset":
        X = np.asarray(X, dtype=float).reshape(-1, self.p - 1)
        y = np.asarray(y, dtype=float).reshape(-1)
        return Dataset(np.vstack([self.X, X]), np.concatenate([self.y, y]),
                       self.label if label is None else label)

    def shifted(self, b) -> "Dataset":
        """Regression shift: ``y_i <- y_i + (1, x_i') b``."""
        b = np.asarray(b, dtype=float)
        if b.shape != (self.p,):
            raise DimensionError(f"shift must have length {self.p}")
        return Dataset(self.X, self.y + self.design @ b, self.label)


@dataclass(frozen=True, eq=False)
class Fit:
    beta: np.ndarray = field()

    def __post_init__(self):
        beta = np.array(self.beta, dtype=float).reshape(-1)
        if beta.size < 2:
            raise DimensionError("beta needs an intercept and at least one slope")
        beta.setflags(write=False)
        object.__setattr__(self, "beta", beta)

    @property
    def p(self) -> int:
        return self.beta.size

    @property
    def intercept(self) -> float:
        return float(self.beta[0])

    @property
    def slope(self) -> np.ndarray:
        return self.beta[1:]

    @property
    def tan_theta(self) -> float:
        """Tangent of the acute angle between the fit and the horizontal."""
        return float(np.linalg.norm(self.slope))

    def predict(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float).reshape(-1, self.p - 1)
        return self.beta[0] + X @ self.slope

    def __repr__(self):
        return f"Fit({np.array2string(self.beta, precision=6)})"


def _check(d: Dataset, beta) -> np.ndarray:
    beta = beta.beta if isinstance(beta, Fit) else np.asarray(beta, dtype=float)
    if beta.shape[-1] != d.p:
        raise DimensionError(f"beta has length {beta.shape[-1]}, dataset has p={d.p}")
    return beta


def residuals(d: Dataset, f) -> np.ndarray:
    """``r_i = y_i - beta_1 - x_i' beta_2`` in dataset order.

    ``f`` may be a :class:`Fit`, a length-p vector or a (k, p) stack of fits, in
    which case a (k, n) array is returned.
    """
    beta = _check(d, f)
    return d.y - (beta[..., :1] + beta[..., 1:] @ d.X.T)


def zero_tolerance(d: Dataset, f) -> np.ndarray:
    """Per-point threshold under which a residual is treated as exactly zero."""
    beta = _check(d, f)
    xnorm = np.linalg.norm(d.X, axis=1)
    bnorm = np.linalg.norm(beta, axis=-1)[..., None]
    return ZERO_RTOL * (1.0 + np.abs(d.y) + bnorm * (1.0 + xnorm))


def residual_signs(d: Dataset, f) -> tuple[np.ndarray, np.ndarray]:
    """Boolean masks ``(r >= 0, r <= 0)``; zero residuals are set in both."""
    r = residuals(d, f)
    tol = zero_tolerance(d, f)
    return r >= -tol, r <= tol


def solve_batched(A, b, pivot_tol: float = PIVOT_TOL):
    """Solve a stack of small square systems by scaled partial pivoting.

    Parameters
    ----------
    A : array of shape (k, m, m)
    b : array of shape (k, m)

    Returns
    -------
    x : array of shape (k, m)
        Solutions; rows flagged singular are filled with NaN.
    ok : bool array of shape (k,)
        False where a scaled pivot fell below ``pivot_tol``.
    """
    A = np.array(A, dtype=float)
    b = np.array(b, dtype=float)
    k, m, _ = A.shape
    scale = np.abs(A).max(axis=2)
    ok = scale.min(axis=1) > 0
    scale[scale == 0] = 1.0
    rows = np.arange(k)
    for col in range(m):
        cand = np.abs(A[:, col:, col]) / scale[:, col:]
        piv = col + cand.argmax(axis=1)
        ok &= cand.max(axis=1) >= pivot_tol
        for arr in (A, b, scale):
            tmp = arr[rows, col].copy()
            arr[rows, col] = arr[rows, piv]
            arr[rows, piv] = tmp
        pivot = A[:, col, col].copy()
        pivot[~ok] = 1.0
        if col + 1 < m:
            factor = A[:, col + 1:, col] / pivot[:, None]
            A[:, col + 1:, col:] -= factor[:, :, None] * A[:, col, None, col:]
            b[:, col + 1:] -= factor * b[:, col, None]
    x = np.empty_like(b)
    for col in range(m - 1, -1, -1):
        pivot = A[:, col, col]
        pivot = np.where(ok, pivot, 1.0)
        acc = b[:, col] - np.einsum("kj,kj->k", A[:, col, col + 1:], x[:, col + 1:])
        x[:, col] = acc / pivot
    x[~ok] = np.nan
    return x, ok


def fit_through_points(d: Dataset, idx) -> Fit:
    """The fit whose hyperplane passes through the ``p`` selected observations."""
    idx = list(idx)
    if len(idx) != d.p or len(set(idx)) != d.p:
        raise DimensionError(f"need {d.p} distinct indices, got {idx}")
    beta, ok = solve_batched(d.design[idx][None], d.y[idx][None])
    if not ok[0]:
        raise DegenerateSubset(f"observations {sorted(idx)} lie in a vertical hyperplane")
    return Fit(beta[0])


def fits_through_subsets(d: Dataset, subsets) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised :func:`fit_through_points` for a (k, p) array of index sets.

    Returns the (k, p) coefficient array and a mask of nonsingular subsets.
    """
    subsets = np.asarray(subsets, dtype=int).reshape(-1, d.p)
    if subsets.size == 0:
        return np.empty((0, d.p)), np.empty(0, dtype=bool)
    return solve_batched(d.design[subsets], d.y[subsets])


class GeneralPosition(NamedTuple):
    ok: bool
    offending: tuple[int, ...] | None
    x_only: bool


def _rel_det(M: np.ndarray) -> np.ndarray:
    """|det| divided by the Hadamard bound, for a stack of square matrices."""
    det = np.abs(np.linalg.det(M))
    bound = np.prod(np.linalg.norm(M, axis=2), axis=1)
    return det / np.where(bound > 0, bound, 1.0)


def is_general_position(d: Dataset, tol: float = 1e-9,
                        max_subsets: int = 5_000_000) -> GeneralPosition:
    """Check that any ``p`` observations determine a unique fit and that no
    ``p + 1`` observations share a hyperplane of the (x, y) space.

    ``x_only`` reports the weaker condition on the design points alone (every
    ``p`` of the rows ``(1, x_i')`` are linearly independent). ``offending`` is
    the first violating index set in lexicographic order.
    """
    n, p = d.n, d.p
    if comb(n, p + 1) + comb(n, p) > max_subsets:
        raise BudgetExceeded(f"general position check needs C({n},{p + 1}) determinants")
    W = d.design
    x_bad = None
    for chunk in _chunks(itertools.combinations(range(n), p), 200_000):
        bad = np.flatnonzero(_rel_det(W[chunk]) <= tol)
        if bad.size:
            x_bad = tuple(int(i) for i in chunk[bad[0]])
            break
    x_only = x_bad is None
    full = np.column_stack([W, d.y])
    for chunk in _chunks(itertools.combinations(range(n), p + 1), 200_000):
        bad = np.flatnonzero(_rel_det(full[chunk]) <= tol)
        if bad.size:
            return GeneralPosition(False, tuple(int(i) for i in chunk[bad[0]]), x_only)
    if x_bad is not None:
        return GeneralPosition(False, x_bad, x_only)
    return GeneralPosition(True, None, True)


def _chunks(iterable, size):
    it = iter(iterable)
    while True:
        block = list(itertools.islice(it, size))
        if not block:
            return
        yield np.array(block, dtype=int)


# --- CSV ---------------------------------------------------------------------

def _fmt(v: float) -> str:
    return repr(float(v))


def dataset_to_csv(d: Dataset) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f"x{j + 1}" for j in range(d.p - 1)] + ["y"])
    for row in d.points():
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def dataset_from_csv(text: str, label: str = "") -> Dataset:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        raise ValueError("empty CSV")
    header = [h.strip() for h in rows[0]]
    expected = [f"x{j + 1}" for j in range(len(header) - 1)] + ["y"]
    if len(header) < 2 or header != expected:
        raise ValueError(f"bad header {header!r}; expected {','.join(expected)}")
    body = [r for r in rows[1:] if r]
    try:
        arr = np.array([[float(v) for v in r] for r in body], dtype=float)
    except ValueError as exc:
        raise ValueError(f"non-numeric CSV field: {exc}") from None
    if arr.ndim != 2 or arr.shape[1] != len(header):
        raise ValueError("ragged CSV rows")
    return Dataset.from_points(arr, label)


def read_csv(path, label: str | None = None) -> Dataset:
    with open(path, encoding="utf-8", newline="") as fh:
        return dataset_from_csv(fh.read(), label if label is not None else str(path))


def write_csv(d: Dataset, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(dataset_to_csv(d))


def four_point_dataset() -> Dataset:
    """The four points (0,0), (1,1), (5,0), (6,1) in general position."""
    return Dataset.from_points([[0, 0], [1, 1], [5, 0], [6, 1]], "four-point")
