"""Least-squares geometry for nested linear models.

Everything downstream (Bayes factors, error probabilities, consistency
diagnostics) is driven by residual sums of squares of nested fits and by
projection-gap quadratic forms.  Fits go through a QR decomposition; hat
matrices are never materialized here (test oracles build them explicitly).
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from .errors import (
    DegenerateFitError,
    InternalConsistencyError,
    InvalidModelError,
    NestingViolationError,
    SingularDesignError,
)

# Relative threshold on the R-factor diagonal below which a design is
# declared rank deficient.
RANK_TOL = 1e-10

# Rounding slack allowed when clamping the RSS ratio back into [0, 1].
RATIO_CLAMP = 1e-12


@dataclass
class Dataset:
    """A response vector with a full-rank design matrix.

    Parameters
    ----------
    y : ndarray of shape (n,)
        Response observations.
    X : ndarray of shape (n, k)
        Design matrix; column 0 must be identically one (the intercept).
    column_names : sequence of str, optional
        One name per design column.  Defaults to ``x0 .. x{k-1}``.
    """

    y: np.ndarray
    X: np.ndarray
    column_names: tuple = field(default=None)

    def __post_init__(self):
        self.y = np.asarray(self.y, dtype=np.float64)
        self.X = np.asarray(self.X, dtype=np.float64)
        if self.y.ndim != 1:
            raise ValueError(f"y must be 1-dimensional, got shape {self.y.shape}")
        if self.X.ndim != 2:
            raise ValueError(f"X must be 2-dimensional, got shape {self.X.shape}")
        n, k = self.X.shape
        if self.y.shape[0] != n:
            raise ValueError(f"y has {self.y.shape[0]} rows but X has {n}")
        if not (n > k >= 1):
            raise ValueError(f"need n > k >= 1, got n={n}, k={k}")
        if not np.all(self.X[:, 0] == 1.0):
            raise ValueError("column 0 of X must be identically 1 (intercept)")
        if self.column_names is None:
            self.column_names = tuple(f"x{i}" for i in range(k))
        else:
            self.column_names = tuple(self.column_names)
            if len(self.column_names) != k:
                raise ValueError(
                    f"{len(self.column_names)} column names for {k} columns"
                )
        _check_rank(self.X, self.column_names)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def k(self) -> int:
        return self.X.shape[1]


@dataclass(frozen=True, order=True)
class ModelSpec:
    """A submodel as a sorted tuple of design-column indices.

    The intercept column (index 0) is always included; a model with ``j``
    indices is a "model with j regressors".
    """

    indices: tuple

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        if idx != tuple(sorted(set(idx))):
            raise InvalidModelError(f"indices must be strictly increasing: {idx}")
        if len(idx) == 0:
            raise InvalidModelError("empty model: at least the intercept is required")
        if idx[0] != 0:
            raise InvalidModelError(f"model must contain the intercept index 0: {idx}")
        object.__setattr__(self, "indices", idx)

    @property
    def size(self) -> int:
        return len(self.indices)

    def is_nested_in(self, other: "ModelSpec") -> bool:
        return set(self.indices) <= set(other.indices)

    def validate_for(self, dataset: Dataset) -> None:
        if self.indices[-1] >= dataset.k:
            raise InvalidModelError(
                f"index {self.indices[-1]} out of range for k={dataset.k}"
            )

    @classmethod
    def intercept_only(cls) -> "ModelSpec":
        return cls((0,))

    @classmethod
    def full(cls, k: int) -> "ModelSpec":
        return cls(tuple(range(k)))

    def label(self, column_names) -> str:
        return "+".join(column_names[i] for i in self.indices)


@dataclass(frozen=True)
class FitSummary:
    """Result of a least-squares fit of one submodel."""

    rss: float
    coefficients: np.ndarray
    sigma_hat: float
    df: int


@dataclass(frozen=True)
class BetaRatio:
    """The sufficient statistic RSS_outer / RSS_inner of a nested pair.

    ``i`` and ``j`` are the inner and outer model sizes and ``n`` the sample
    size; ``value`` lies in [0, 1] whenever the pair is nested.
    """

    value: float
    i: int
    j: int
    n: int


def _check_rank(M: np.ndarray, names=None) -> np.ndarray:
    """QR-factor a matrix, raising SingularDesignError on rank deficiency."""
    R = np.linalg.qr(M, mode="r")
    diag = np.abs(np.diag(R))
    if diag.max() == 0.0 or diag.min() < RANK_TOL * diag.max():
        detail = ""
        if names is not None:
            detail = f" (columns: {', '.join(names)})"
        raise SingularDesignError(
            f"design submatrix is numerically rank deficient{detail}"
        )
    return R


def fit(dataset: Dataset, model: ModelSpec) -> FitSummary:
    """Least-squares fit of one submodel via QR decomposition.

    Parameters
    ----------
    dataset : Dataset
    model : ModelSpec
        Indices must be valid for the dataset and the selected columns of
        full rank.

    Returns
    -------
    FitSummary
        Residual sum of squares, coefficients, MLE scale sqrt(rss/n) and
        residual degrees of freedom n - j.
    """
    model.validate_for(dataset)
    Xm = dataset.X[:, model.indices]
    names = tuple(dataset.column_names[i] for i in model.indices)
    Q, R = np.linalg.qr(Xm, mode="reduced")
    diag = np.abs(np.diag(R))
    if diag.max() == 0.0 or diag.min() < RANK_TOL * diag.max():
        raise SingularDesignError(
            f"design submatrix is numerically rank deficient (columns: {', '.join(names)})"
        )
    qty = Q.T @ dataset.y
    coef = solve_triangular(R, qty, lower=False)
    resid = dataset.y - Q @ qty
    rss = float(resid @ resid)
    n = dataset.n
    return FitSummary(
        rss=rss,
        coefficients=coef,
        sigma_hat=float(np.sqrt(rss / n)),
        df=n - model.size,
    )


def beta_ratio(dataset: Dataset, inner: ModelSpec, outer: ModelSpec) -> BetaRatio:
    """RSS ratio statistic of a nested pair, clamped against rounding noise.

    Raises
    ------
    NestingViolationError
        If ``inner`` is not nested in ``outer``.
    DegenerateFitError
        If the inner model fits exactly (zero RSS denominator).
    """
    if not inner.is_nested_in(outer):
        raise NestingViolationError(
            f"model {inner.indices} is not nested in {outer.indices}"
        )
    rss_inner = fit(dataset, inner).rss
    rss_outer = fit(dataset, outer).rss
    if rss_inner == 0.0:
        raise DegenerateFitError("inner model has zero residual sum of squares")
    value = rss_outer / rss_inner
    if -RATIO_CLAMP <= value < 0.0:
        value = 0.0
    elif 1.0 < value <= 1.0 + RATIO_CLAMP:
        value = 1.0
    elif not (0.0 <= value <= 1.0):
        raise InternalConsistencyError(
            f"RSS ratio {value!r} outside [0, 1] beyond rounding noise"
        )
    return BetaRatio(value=value, i=inner.size, j=outer.size, n=dataset.n)


def _residual_projection(dataset: Dataset, model: ModelSpec, M: np.ndarray):
    """(I - H_model) @ M without forming the hat matrix."""
    model.validate_for(dataset)
    Xm = dataset.X[:, model.indices]
    Q, R = np.linalg.qr(Xm, mode="reduced")
    diag = np.abs(np.diag(R))
    if diag.max() == 0.0 or diag.min() < RANK_TOL * diag.max():
        raise SingularDesignError("design submatrix is numerically rank deficient")
    return M - Q @ (Q.T @ M)


def projection_gap_matrix(
    dataset: Dataset, model: ModelSpec, true_design_columns
) -> np.ndarray:
    """Scaled projection gap X_T' (I - H_model) X_T / n.

    This is the finite-sample version of the limiting design-regularity
    matrix controlling which models can be separated asymptotically.  The
    result is symmetrized (rounding noise only) and positive semidefinite
    up to -1e-10 on its eigenvalues.
    """
    cols = tuple(int(c) for c in true_design_columns)
    if len(cols) == 0:
        raise IndexError("true_design_columns must be non-empty")
    if min(cols) < 0 or max(cols) >= dataset.k:
        raise IndexError(
            f"column indices {cols} out of range for k={dataset.k}"
        )
    Xt = dataset.X[:, cols]
    G = Xt.T @ _residual_projection(dataset, model, Xt) / dataset.n
    return (G + G.T) / 2.0


def model_distance(
    dataset: Dataset,
    model: ModelSpec,
    true_model: ModelSpec,
    true_coeffs,
    true_sigma: float,
) -> float:
    """Quadratic-form distance from a candidate model to the true model.

    Computes alpha_T' [X_T'(I - H_model)X_T / n] alpha_T / sigma_T**2.  Zero
    (within rounding) exactly when the true model is nested in ``model``;
    enlarging ``model`` never increases the distance.
    """
    true_coeffs = np.asarray(true_coeffs, dtype=np.float64)
    if true_sigma <= 0.0:
        raise ValueError(f"true_sigma must be positive, got {true_sigma}")
    if true_coeffs.shape != (true_model.size,):
        raise ValueError(
            f"true_coeffs has shape {true_coeffs.shape}, expected ({true_model.size},)"
        )
    S = projection_gap_matrix(dataset, model, true_model.indices)
    return float(true_coeffs @ S @ true_coeffs) / (true_sigma**2)
