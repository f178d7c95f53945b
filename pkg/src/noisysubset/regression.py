"""Sparse regression objective: R^2 = 1 - MSE of the best linear fit on a column subset."""

from __future__ import annotations

import io
import logging
import os
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from .core import ItemSet
from .objectives import Objective

log = logging.getLogger(__name__)

JITTER = 1e-8


class ParseError(ValueError):
    pass


@dataclass
class RegressionData:
    """Observation matrix ``X`` (rows x features) and target ``z``.

    ``columns`` maps each column of ``X`` to its index in the source file,
    so dropped constant columns can be traced. ``means``/``stds`` are the
    statistics used by :func:`normalize` (``None`` before normalization).
    """

    X: np.ndarray
    z: np.ndarray
    columns: np.ndarray = None
    means: np.ndarray | None = None
    stds: np.ndarray | None = None
    z_mean: float | None = None
    z_std: float | None = None
    dropped: list[int] = field(default_factory=list)

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=float)
        self.z = np.asarray(self.z, dtype=float)
        if self.X.ndim != 2 or self.X.shape[0] != self.z.shape[0]:
            raise ValueError("X must be 2-D with one row per target entry")
        if self.X.shape[0] < 2 or self.X.shape[1] < 1:
            raise ValueError("need at least 2 rows and 1 feature")
        if self.columns is None:
            self.columns = np.arange(self.X.shape[1])

    @property
    def n_rows(self) -> int:
        return self.X.shape[0]

    @property
    def n_features(self) -> int:
        return self.X.shape[1]


@dataclass
class FitResult:
    coefficients: np.ndarray
    mse: float

    @property
    def r2(self) -> float:
        return 1.0 - self.mse


def load_tabular(source, n_features: int | None = None) -> RegressionData:
    """Parse rows of the form ``label idx:val idx:val ...`` (1-based indices).

    Missing entries are 0. ``n_features`` fixes the column count; otherwise
    the largest index seen is used.
    """
    if isinstance(source, (str, os.PathLike)):
        with open(source, "rb") as fh:
            return load_tabular(fh, n_features)
    if isinstance(source, (bytes, bytearray)):
        source = io.BytesIO(source)
    labels, rows, cols, vals = [], [], [], []
    for lineno, raw in enumerate(source, start=1):
        line = raw.decode("utf-8") if isinstance(raw, bytes) else raw
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        r = len(labels)
        try:
            labels.append(float(tokens[0]))
            for tok in tokens[1:]:
                idx, val = tok.split(":", 1)
                j = int(idx)
                if j < 1 or (n_features is not None and j > n_features):
                    raise ParseError(f"line {lineno}: feature index {j} out of range")
                rows.append(r)
                cols.append(j - 1)
                vals.append(float(val))
        except ParseError:
            raise
        except ValueError as exc:
            raise ParseError(f"line {lineno}: {exc}") from exc
    if not labels:
        raise ParseError("no data rows")
    width = n_features if n_features is not None else (max(cols) + 1 if cols else 1)
    X = np.zeros((len(labels), width))
    X[rows, cols] = vals
    return RegressionData(np.asfortranarray(X), np.array(labels))


def normalize(data: RegressionData) -> RegressionData:
    """Standardize every column and the target to mean 0 and variance 1.

    Constant columns are dropped (with a warning); a constant target is an
    error.
    """
    z_std = data.z.std()
    if z_std == 0:
        raise ValueError("target is constant; cannot normalize")
    means = data.X.mean(axis=0)
    stds = data.X.std(axis=0)
    keep = stds > 0
    dropped = [int(c) for c in data.columns[~keep]]
    if dropped:
        log.warning("dropping %d constant column(s): %s", len(dropped), dropped)
    X = (data.X[:, keep] - means[keep]) / stds[keep]
    z_mean = data.z.mean()
    z = (data.z - z_mean) / z_std
    return RegressionData(
        np.asfortranarray(X), z, data.columns[keep], means[keep], stds[keep],
        float(z_mean), float(z_std), list(data.dropped) + dropped,
    )


def solve_spd(gram: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve ``gram @ a = rhs`` by Cholesky, adding diagonal jitter if singular."""
    try:
        return linalg.cho_solve(linalg.cho_factor(gram, lower=True), rhs)
    except linalg.LinAlgError:
        jittered = gram + JITTER * np.eye(gram.shape[0])
        return linalg.cho_solve(linalg.cho_factor(jittered, lower=True), rhs)


def _fit(Xs: np.ndarray, z: np.ndarray) -> FitResult:
    gram = Xs.T @ Xs
    b = Xs.T @ z
    alpha = solve_spd(gram, b)
    resid = z - Xs @ alpha
    return FitResult(alpha, float(resid @ resid) / len(z))


def mse_on_rows(data: RegressionData, s: ItemSet, rows=None) -> FitResult:
    """Least-squares fit of ``z`` on the columns in ``s`` restricted to ``rows``.

    ``rows=None`` uses every row. No intercept is fitted; normalize first.
    """
    cols = s.indices
    if cols.size == 0:
        raise ValueError("mse_on_rows needs a nonempty subset")
    if rows is None:
        return _fit(data.X[:, cols], data.z)
    rows = np.asarray(rows)
    return _fit(data.X[np.ix_(rows, cols)], data.z[rows])


class RegressionObjective(Objective):
    """R^2 of the subset: noisy on a row sample, exact on all rows.

    By default a fresh sample of ``sample_size`` rows (without replacement)
    is drawn on every noisy call. With ``fixed_sample=True`` one sample is
    drawn per run, at the first noisy call with a given generator.
    Sampled R^2 is not clamped and may fall outside [0, 1].
    """

    def __init__(self, data: RegressionData, sample_size: int = 1000,
                 fixed_sample: bool = False):
        if not 1 <= sample_size <= data.n_rows:
            raise ValueError(f"sample_size must lie in [1, {data.n_rows}]")
        self.data = data
        self.ground_size = data.n_features
        self.sample_size = sample_size
        self.fixed_sample = fixed_sample
        self._fixed_rows = {}
        # full-data Gram matrix; exact evaluations only slice it
        self._gram = data.X.T @ data.X
        self._xtz = data.X.T @ data.z
        self._zz = float(data.z @ data.z)

    def _rows(self, rng):
        if self.sample_size == self.data.n_rows:
            return None
        if self.fixed_sample:
            # holding the generator keeps its id from being reused
            entry = self._fixed_rows.get(id(rng))
            if entry is None or entry[0] is not rng:
                rows = np.sort(rng.choice(self.data.n_rows, self.sample_size, replace=False))
                entry = self._fixed_rows[id(rng)] = (rng, rows)
            return entry[1]
        return np.sort(rng.choice(self.data.n_rows, self.sample_size, replace=False))

    def _noisy(self, s, rng):
        rows = self._rows(rng)
        if rows is None:
            return self._exact(s)
        return mse_on_rows(self.data, s, rows).r2

    def _exact(self, s):
        cols = s.indices
        b = self._xtz[cols]
        alpha = solve_spd(self._gram[np.ix_(cols, cols)], b)
        # ||z - X a||^2 = z.z - 2 a.b + a' G a, and G a = b at the optimum
        g_alpha = self._gram[np.ix_(cols, cols)] @ alpha
        rss = self._zz - 2.0 * alpha @ b + alpha @ g_alpha
        return 1.0 - max(rss, 0.0) / self.data.n_rows


def make_regression_objective(data: RegressionData, sample_size: int = 1000,
                              fixed_sample: bool = False) -> RegressionObjective:
    return RegressionObjective(data, sample_size, fixed_sample)
