"""Per-plant regressors: ordinary least squares and epsilon-SVR (RBF kernel).

The SVR dual is solved by a from-scratch SMO solver with two interchangeable
backends: a compiled Cython core (``pvlead._smo``) and a pure-NumPy fallback
(``pvlead._smo_py``), selected at import. Set ``PVLEAD_FORCE_PYTHON_SOLVER=1``
to force the fallback; ``SOLVER_BACKEND`` records which one is active.

Features are standardized (z-score, training data only) before kernel
evaluation so one gamma range is meaningful for every plant; raw SSR and
temperature scales differ by three orders of magnitude. Targets stay in
their original units. Predictions are clipped at zero because production
is nonnegative.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from datetime import date

import numpy as np

from .errors import (
    DegenerateFeatureError,
    DimensionMismatchError,
    NotConvergedError,
    ParseError,
    RankDeficientError,
    TooFewSamplesError,
)

if os.environ.get("PVLEAD_FORCE_PYTHON_SOLVER"):
    from . import _smo_py as _solver

    SOLVER_BACKEND = "python"
else:
    try:
        from . import _smo as _solver  # type: ignore[attr-defined]

        SOLVER_BACKEND = "compiled"
    except ImportError:
        from . import _smo_py as _solver

        SOLVER_BACKEND = "python"

DEFAULT_TOL = 1e-6
DEFAULT_MAX_ITER = 1_000_000

solve_epsilon_svr_dual = _solver.solve_epsilon_svr


@dataclass(frozen=True)
class Sample:
    """One plant-day: daily insolation, temperature and energy produced."""

    ssr: float  # Wh/m2/day
    t: float  # degC
    y: float  # MWh/day


class SampleSet:
    """Column-wise view of samples, optionally carrying their dates."""

    def __init__(self, ssr, t, y, dates: tuple[date, ...] | None = None):
        self.ssr = np.asarray(ssr, dtype=np.float64)
        self.t = np.asarray(t, dtype=np.float64)
        self.y = np.asarray(y, dtype=np.float64)
        if not (self.ssr.shape == self.t.shape == self.y.shape) or self.ssr.ndim != 1:
            raise ValueError("ssr, t, y must be 1-d arrays of equal length")
        if np.any(self.ssr < 0) or np.any(self.y < 0):
            raise ValueError("ssr and y must be >= 0")
        self.dates = tuple(dates) if dates is not None else None
        if self.dates is not None and len(self.dates) != len(self.y):
            raise ValueError("one date per sample required")

    @classmethod
    def from_samples(cls, samples: list[Sample]) -> "SampleSet":
        return cls(
            [s.ssr for s in samples], [s.t for s in samples], [s.y for s in samples]
        )

    def __len__(self) -> int:
        return len(self.y)

    @property
    def features(self) -> np.ndarray:
        return np.column_stack([self.ssr, self.t])

    def subset(self, idx) -> "SampleSet":
        dates = tuple(self.dates[i] for i in idx) if self.dates is not None else None
        return SampleSet(self.ssr[idx], self.t[idx], self.y[idx], dates)


@dataclass(frozen=True)
class Scaler:
    """Per-feature z-score transform fitted on training data only."""

    mean: np.ndarray
    std: np.ndarray

    @classmethod
    def fit(cls, X: np.ndarray) -> "Scaler":
        X = np.asarray(X, dtype=np.float64)
        mean = X.mean(axis=0)
        std = X.std(axis=0)
        if np.any(std <= 0.0):
            bad = int(np.argmin(std))
            raise DegenerateFeatureError(f"feature {bad} has zero variance on training data")
        return cls(mean, std)

    def transform(self, X: np.ndarray) -> np.ndarray:
        return (np.asarray(X, dtype=np.float64) - self.mean) / self.std


@dataclass(frozen=True)
class SvrHyperParams:
    C: float
    epsilon: float
    gamma: float

    def __post_init__(self):
        if self.C <= 0 or self.gamma <= 0 or self.epsilon < 0:
            raise ValueError("need C > 0, gamma > 0, epsilon >= 0")


@dataclass(frozen=True)
class LinearModel:
    """y = a1*SSR + a2*T + a3, coefficients in original units."""

    a1: float
    a2: float
    a3: float

    def decision_function(self, ssr, t):
        return self.a1 * np.asarray(ssr, dtype=np.float64) + self.a2 * np.asarray(
            t, dtype=np.float64
        ) + self.a3

    def predict(self, ssr, t):
        return np.maximum(self.decision_function(ssr, t), 0.0)


@dataclass(frozen=True)
class SvrModel:
    """Kernel expansion f(x) = sum_i beta_i K(x_i, x) + bias on scaled inputs."""

    scaler: Scaler
    params: SvrHyperParams
    support_x: np.ndarray  # (m, 2) scaled features
    beta: np.ndarray  # (m,) dual coefficients, nonzero
    bias: float
    sv_indices: tuple[int, ...]  # positions in the training set
    iterations: int = 0
    kkt_violation: float = 0.0
    dual_objective: float = 0.0

    def decision_function(self, ssr, t):
        ssr = np.atleast_1d(np.asarray(ssr, dtype=np.float64))
        t = np.atleast_1d(np.asarray(t, dtype=np.float64))
        Xq = self.scaler.transform(np.column_stack([ssr, t]))
        if self.beta.size == 0:
            return np.full(Xq.shape[0], self.bias)
        K = rbf_kernel_matrix(Xq, self.support_x, self.params.gamma)
        return K @ self.beta + self.bias

    def predict(self, ssr, t):
        return np.maximum(self.decision_function(ssr, t), 0.0)


def predict(model, ssr, t):
    """Clipped-at-zero prediction for either model kind."""
    return model.predict(ssr, t)


def fit_ols(samples: SampleSet) -> LinearModel:
    """Least-squares fit of the two-predictor linear model."""
    n = len(samples)
    if n < 3:
        raise TooFewSamplesError(f"OLS needs at least 3 samples, got {n}")
    X = np.column_stack([samples.ssr, samples.t, np.ones(n)])
    coef, _, rank, _ = np.linalg.lstsq(X, samples.y, rcond=None)
    if rank < 3:
        raise RankDeficientError("design matrix [ssr, t, 1] is rank deficient")
    return LinearModel(float(coef[0]), float(coef[1]), float(coef[2]))


def rbf_kernel(u, v, gamma: float) -> float:
    """exp(-gamma * ||u - v||^2); equals 1 at zero distance."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise DimensionMismatchError(f"shapes {u.shape} and {v.shape} differ")
    d = u - v
    return float(np.exp(-gamma * np.dot(d, d)))


def squared_distances(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Pairwise squared Euclidean distances, clipped at zero."""
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    aa = np.sum(A * A, axis=1)[:, None]
    bb = np.sum(B * B, axis=1)[None, :]
    return np.maximum(aa + bb - 2.0 * (A @ B.T), 0.0)


def rbf_kernel_matrix(A: np.ndarray, B: np.ndarray, gamma: float) -> np.ndarray:
    return np.exp(-gamma * squared_distances(A, B))


def fit_svr(
    samples: SampleSet,
    params: SvrHyperParams,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> SvrModel:
    """Train an epsilon-SVR model, raising NotConvergedError on a blown budget.

    The raised error carries the iteration count and remaining KKT violation;
    a partially converged model is never returned silently.
    """
    n = len(samples)
    if n < 2:
        raise TooFewSamplesError(f"SVR needs at least 2 samples, got {n}")
    scaler = Scaler.fit(samples.features)
    Xs = scaler.transform(samples.features)
    K = np.exp(-params.gamma * squared_distances(Xs, Xs))
    beta, bias, iters, violation, objective = _solver.solve_epsilon_svr(
        K, samples.y, params.C, params.epsilon, tol, max_iter
    )
    if violation > tol:
        raise NotConvergedError(iters, violation, tol)
    keep = np.nonzero(beta != 0.0)[0]
    return SvrModel(
        scaler=scaler,
        params=params,
        support_x=Xs[keep].copy(),
        beta=beta[keep].copy(),
        bias=float(bias),
        sv_indices=tuple(int(i) for i in keep),
        iterations=int(iters),
        kkt_violation=float(violation),
        dual_objective=float(objective),
    )


_FORMAT_VERSION = 1


def save_model(model, path) -> None:
    """Serialize a model with full decimal precision (repr round-trips)."""
    lines = [f"pvlead-model {_FORMAT_VERSION}"]
    if isinstance(model, LinearModel):
        lines.append("kind linear")
        lines.append(f"a1 {model.a1!r}")
        lines.append(f"a2 {model.a2!r}")
        lines.append(f"a3 {model.a3!r}")
    elif isinstance(model, SvrModel):
        lines.append("kind svr")
        lines.append(f"feature_means {model.scaler.mean[0]!r} {model.scaler.mean[1]!r}")
        lines.append(f"feature_stds {model.scaler.std[0]!r} {model.scaler.std[1]!r}")
        lines.append(f"C {model.params.C!r}")
        lines.append(f"epsilon {model.params.epsilon!r}")
        lines.append(f"gamma {model.params.gamma!r}")
        lines.append(f"bias {model.bias!r}")
        lines.append(f"n_sv {len(model.beta)}")
        for k in range(len(model.beta)):
            lines.append(
                f"sv {model.support_x[k, 0]!r} {model.support_x[k, 1]!r} "
                f"{model.beta[k]!r} {model.sv_indices[k]}"
            )
    else:
        raise TypeError(f"cannot serialize {type(model).__name__}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def load_model(path):
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or not lines[0].startswith("pvlead-model "):
        raise ParseError(f"{path}: not a pvlead model file")
    version = lines[0].split()[1]
    if int(version) != _FORMAT_VERSION:
        raise ParseError(f"{path}: unsupported model format version {version}")
    fields: dict[str, list[str]] = {}
    sv_rows: list[list[str]] = []
    for line in lines[1:]:
        parts = line.split()
        if not parts:
            continue
        if parts[0] == "sv":
            sv_rows.append(parts[1:])
        else:
            fields[parts[0]] = parts[1:]
    try:
        kind = fields["kind"][0]
        if kind == "linear":
            return LinearModel(
                float(fields["a1"][0]), float(fields["a2"][0]), float(fields["a3"][0])
            )
        if kind == "svr":
            n_sv = int(fields["n_sv"][0])
            if len(sv_rows) != n_sv:
                raise ParseError(f"{path}: expected {n_sv} sv rows, found {len(sv_rows)}")
            support = np.array([[float(r[0]), float(r[1])] for r in sv_rows]).reshape(n_sv, 2)
            beta = np.array([float(r[2]) for r in sv_rows])
            indices = tuple(int(r[3]) for r in sv_rows)
            return SvrModel(
                scaler=Scaler(
                    np.array([float(v) for v in fields["feature_means"]]),
                    np.array([float(v) for v in fields["feature_stds"]]),
                ),
                params=SvrHyperParams(
                    float(fields["C"][0]),
                    float(fields["epsilon"][0]),
                    float(fields["gamma"][0]),
                ),
                support_x=support,
                beta=beta,
                bias=float(fields["bias"][0]),
                sv_indices=indices,
            )
        raise ParseError(f"{path}: unknown model kind {kind!r}")
    except (KeyError, ValueError, IndexError) as exc:
        raise ParseError(f"{path}: malformed model file: {exc}") from exc
