"""Forecast-error metrics, k-fold cross-validation, hyperparameter grid
search and grouped reporting.

Percentage errors use MdAPE, the median of |100 (pred - target) / target|.
Days with production below a floor (default: none; the pipeline passes 1% of
each plant's observed maximum) are excluded from percentage errors because
the ratio diverges at zero production; Pearson correlation uses all samples.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from datetime import date

import numpy as np

from .errors import (
    ExcludedAllError,
    LengthMismatchError,
    NotConvergedError,
    TooFewSamplesError,
    ZeroVarianceError,
)
from .svr import (
    DEFAULT_MAX_ITER,
    DEFAULT_TOL,
    SampleSet,
    Scaler,
    SvrHyperParams,
    solve_epsilon_svr_dual,
    squared_distances,
)

SEASONS = ("DJF", "MAM", "JJA", "SON")

_MONTH_SEASON = {
    12: "DJF", 1: "DJF", 2: "DJF",
    3: "MAM", 4: "MAM", 5: "MAM",
    6: "JJA", 7: "JJA", 8: "JJA",
    9: "SON", 10: "SON", 11: "SON",
}


def season_of(day: date) -> str:
    return _MONTH_SEASON[day.month]


@dataclass(frozen=True)
class MetricSet:
    mdape: float  # %
    pearson_r: float
    ape_iqr: float  # interquartile range of absolute percentage errors, %
    n_samples: int
    low_confidence: bool = False


def absolute_percentage_errors(predictions, targets, y_floor: float = 0.0):
    """APEs (%) of samples whose |target| clears the floor."""
    predictions = np.asarray(predictions, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    if predictions.shape != targets.shape or predictions.ndim != 1:
        raise LengthMismatchError(
            f"predictions {predictions.shape} vs targets {targets.shape}"
        )
    keep = np.abs(targets) >= max(y_floor, 1e-300)
    if not np.any(keep):
        raise ExcludedAllError("every sample fell below the percentage-error floor")
    return np.abs(100.0 * (predictions[keep] - targets[keep]) / targets[keep])


def mdape(predictions, targets, y_floor: float = 0.0) -> float:
    return float(np.median(absolute_percentage_errors(predictions, targets, y_floor)))


def ape_iqr(predictions, targets, y_floor: float = 0.0) -> float:
    apes = absolute_percentage_errors(predictions, targets, y_floor)
    q75, q25 = np.percentile(apes, [75.0, 25.0])
    return float(q75 - q25)


def pearson(predictions, targets) -> float:
    predictions = np.asarray(predictions, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    if predictions.shape != targets.shape or predictions.ndim != 1:
        raise LengthMismatchError(
            f"predictions {predictions.shape} vs targets {targets.shape}"
        )
    xa = predictions - predictions.mean()
    ya = targets - targets.mean()
    nx = float(np.sqrt(xa @ xa))
    ny = float(np.sqrt(ya @ ya))
    if nx == 0.0 or ny == 0.0:
        raise ZeroVarianceError("pearson undefined for a constant series")
    return float(xa @ ya / (nx * ny))


def metric_set(predictions, targets, y_floor: float = 0.0) -> MetricSet:
    return MetricSet(
        mdape=mdape(predictions, targets, y_floor),
        pearson_r=pearson(predictions, targets),
        ape_iqr=ape_iqr(predictions, targets, y_floor),
        n_samples=len(np.asarray(targets)),
    )


@dataclass(frozen=True)
class CvConfig:
    k: int = 10
    rng_seed: int = 0
    assignment: str = "shuffle"  # seeded permutation, then k contiguous chunks

    def __post_init__(self):
        if self.k < 2:
            raise ValueError("k must be >= 2")
        if self.assignment != "shuffle":
            raise ValueError(f"unknown fold assignment rule {self.assignment!r}")


def fold_indices(n: int, cv: CvConfig) -> list[np.ndarray]:
    """Disjoint folds covering range(n), sizes differing by at most one.

    Depends only on (cv.rng_seed, n); callers feed samples in a canonical
    order so fold contents are reproducible.
    """
    if n < cv.k:
        raise TooFewSamplesError(f"need at least k={cv.k} samples, got {n}")
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(cv.rng_seed)))
    perm = rng.permutation(n)
    base, extra = divmod(n, cv.k)
    folds = []
    start = 0
    for i in range(cv.k):
        size = base + (1 if i < extra else 0)
        folds.append(np.sort(perm[start : start + size]))
        start += size
    return folds


def _mean_metrics(per_fold: list[MetricSet], n_total: int) -> MetricSet:
    return MetricSet(
        mdape=float(np.mean([m.mdape for m in per_fold])),
        pearson_r=float(np.mean([m.pearson_r for m in per_fold])),
        ape_iqr=float(np.mean([m.ape_iqr for m in per_fold])),
        n_samples=n_total,
    )


def kfold_cv(samples: SampleSet, model_spec, cv: CvConfig, y_floor: float = 0.0) -> MetricSet:
    """Average of the k per-fold metric sets for a model-fitting callable.

    ``model_spec`` maps a training SampleSet to a fitted model exposing
    ``predict(ssr, t)``; any internal scaling is refit per training fold.
    """
    n = len(samples)
    folds = fold_indices(n, cv)
    per_fold = []
    for fold in folds:
        mask = np.ones(n, dtype=bool)
        mask[fold] = False
        train_idx = np.flatnonzero(mask)
        model = model_spec(samples.subset(train_idx))
        val = samples.subset(fold)
        pred = model.predict(val.ssr, val.t)
        per_fold.append(metric_set(pred, val.y, y_floor))
    return _mean_metrics(per_fold, n)


@dataclass(frozen=True)
class SearchGrid:
    c_values: tuple[float, ...]
    epsilon_values: tuple[float, ...]
    gamma_values: tuple[float, ...]

    def __post_init__(self):
        if not (self.c_values and self.epsilon_values and self.gamma_values):
            raise ValueError("grid axes must be non-empty")

    @property
    def size(self) -> int:
        return len(self.c_values) * len(self.epsilon_values) * len(self.gamma_values)

    def combinations(self):
        for c, e, g in itertools.product(
            self.c_values, self.epsilon_values, self.gamma_values
        ):
            yield SvrHyperParams(c, e, g)


def default_search_grid() -> SearchGrid:
    """5 x 3 x 5 = 75 log-spaced combinations: C in [1e-2, 1e2],
    epsilon in [1e-2, 1], gamma in [2^-2, 2^2]."""
    return SearchGrid(
        c_values=tuple(float(v) for v in np.logspace(-2.0, 2.0, 5)),
        epsilon_values=tuple(float(v) for v in np.logspace(-2.0, 0.0, 3)),
        gamma_values=tuple(float(v) for v in 2.0 ** np.linspace(-2.0, 2.0, 5)),
    )


@dataclass(frozen=True)
class GridSearchRow:
    params: SvrHyperParams
    cv_mdape: float  # +inf when any fold failed to converge
    cv_pearson: float
    cv_ape_iqr: float
    converged: bool


def _tie_break_key(row: GridSearchRow):
    # prefer the smoothest model: smaller C, then smaller gamma, then larger eps
    p = row.params
    return (row.cv_mdape, p.C, p.gamma, -p.epsilon)


def grid_search(
    samples: SampleSet,
    grid: SearchGrid,
    cv: CvConfig,
    y_floor: float = 0.0,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> tuple[SvrHyperParams, MetricSet, list[GridSearchRow]]:
    """Exhaustive CV search over the grid, returning the winning combination,
    its CV metrics and the full per-combination audit table.

    Kernel matrices are shared across (C, epsilon) pairs per (fold, gamma);
    a combination whose solver blows its budget on any fold scores +inf.
    """
    n = len(samples)
    folds = fold_indices(n, cv)
    prepared = []
    for fold in folds:
        mask = np.ones(n, dtype=bool)
        mask[fold] = False
        tr = np.flatnonzero(mask)
        scaler = Scaler.fit(samples.features[tr])
        z_tr = scaler.transform(samples.features[tr])
        z_val = scaler.transform(samples.features[fold])
        prepared.append(
            {
                "y_tr": samples.y[tr],
                "y_val": samples.y[fold],
                "d_tr": squared_distances(z_tr, z_tr),
                "d_val": squared_distances(z_val, z_tr),
            }
        )

    results: dict[tuple[float, float, float], GridSearchRow] = {}
    for gamma in grid.gamma_values:
        kernels = [
            (np.exp(-gamma * f["d_tr"]), np.exp(-gamma * f["d_val"])) for f in prepared
        ]
        for c in grid.c_values:
            for eps in grid.epsilon_values:
                params = SvrHyperParams(c, eps, gamma)
                per_fold = []
                failed = False
                for f, (k_tr, k_val) in zip(prepared, kernels):
                    beta, bias, _, violation, _ = solve_epsilon_svr_dual(
                        k_tr, f["y_tr"], c, eps, tol, max_iter
                    )
                    if violation > tol:
                        failed = True
                        break
                    pred = np.maximum(k_val @ beta + bias, 0.0)
                    per_fold.append(metric_set(pred, f["y_val"], y_floor))
                if failed:
                    row = GridSearchRow(params, np.inf, np.nan, np.nan, False)
                else:
                    m = _mean_metrics(per_fold, n)
                    row = GridSearchRow(params, m.mdape, m.pearson_r, m.ape_iqr, True)
                results[(c, eps, gamma)] = row

    table = [results[(c, e, g)] for c, e, g in itertools.product(
        grid.c_values, grid.epsilon_values, grid.gamma_values
    )]
    best = min(table, key=_tie_break_key)
    if not best.converged:
        raise NotConvergedError(max_iter, np.inf, tol)
    metrics = MetricSet(best.cv_mdape, best.cv_pearson, best.cv_ape_iqr, n)
    return best.params, metrics, table


@dataclass(frozen=True)
class EvalRecord:
    """One evaluated plant-day, ready for grouping."""

    day: date
    region: str
    lead: int
    prediction: float
    target: float
    y_floor: float = 0.0


@dataclass(frozen=True)
class GroupKey:
    season: str | None = None
    region: str | None = None
    lead: int | None = None


def grouped_metrics(
    records: list[EvalRecord], by: tuple[str, ...], min_n: int = 20
) -> dict[GroupKey, MetricSet]:
    """Partition records along the requested dimensions and score each group.

    Groups smaller than ``min_n`` are flagged low-confidence. Percentage
    errors honor each record's own floor (floors are per plant); Pearson
    uses every record in the group.
    """
    for dim in by:
        if dim not in ("season", "region", "lead"):
            raise ValueError(f"unknown grouping dimension {dim!r}")
    groups: dict[GroupKey, list[EvalRecord]] = {}
    for rec in records:
        key = GroupKey(
            season=season_of(rec.day) if "season" in by else None,
            region=rec.region if "region" in by else None,
            lead=rec.lead if "lead" in by else None,
        )
        groups.setdefault(key, []).append(rec)
    out = {}
    for key, recs in groups.items():
        pred = np.array([r.prediction for r in recs])
        targ = np.array([r.target for r in recs])
        keep = np.abs(targ) >= np.maximum(
            np.array([r.y_floor for r in recs]), 1e-300
        )
        if not np.any(keep):
            raise ExcludedAllError(f"group {key} lost every record to the floor")
        apes = np.abs(100.0 * (pred[keep] - targ[keep]) / targ[keep])
        q75, q25 = np.percentile(apes, [75.0, 25.0])
        out[key] = MetricSet(
            mdape=float(np.median(apes)),
            pearson_r=pearson(pred, targ),
            ape_iqr=float(q75 - q25),
            n_samples=len(recs),
            low_confidence=len(recs) < min_n,
        )
    return out


def silverman_bandwidth(values: np.ndarray) -> float:
    std = float(values.std())
    q75, q25 = np.percentile(values, [75.0, 25.0])
    iqr = float(q75 - q25)
    spread = min(std, iqr / 1.34) if iqr > 0 else std
    return 0.9 * spread * len(values) ** (-0.2)


def kde_density(
    values,
    bandwidth_rule="silverman",
    grid_size: int = 512,
    span: float = 4.0,
) -> tuple[np.ndarray, np.ndarray]:
    """Gaussian KDE on a fixed evaluation grid; integrates to 1 within 1e-3.

    ``bandwidth_rule`` is ``"silverman"`` or a positive number.
    """
    values = np.asarray(values, dtype=np.float64)
    if values.size < 2:
        raise ValueError("KDE needs at least 2 values")
    if values.std() == 0.0:
        raise ZeroVarianceError("KDE undefined for constant data")
    if bandwidth_rule == "silverman":
        h = silverman_bandwidth(values)
    else:
        h = float(bandwidth_rule)
        if h <= 0:
            raise ValueError("bandwidth must be positive")
    x = np.linspace(values.min() - span * h, values.max() + span * h, grid_size)
    z = (x[:, None] - values[None, :]) / h
    density = np.exp(-0.5 * z * z).sum(axis=1) / (values.size * h * np.sqrt(2.0 * np.pi))
    return x, density


def count_modes(density: np.ndarray, min_prominence_frac: float = 0.05) -> int:
    """Local maxima with prominence above a fraction of the global peak."""
    from scipy.signal import find_peaks

    peaks, _ = find_peaks(density, prominence=min_prominence_frac * density.max())
    return int(len(peaks))
