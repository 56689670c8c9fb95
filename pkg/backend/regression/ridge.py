"""Closed-form ridge regression with an unpenalized intercept."""
from dataclasses import dataclass
from typing import List

import numpy as np
from scipy import linalg

DEFAULT_SIGMA = 0.01


class SingularSystemError(ValueError):
    """Exception raised when an unregularized fit meets a rank-deficient design."""


@dataclass(frozen=True, eq=False)
class RidgeModel:
    w: np.ndarray
    b: float
    sigma: float

    def __post_init__(self):
        self.w.setflags(write=False)

    @property
    def d(self) -> int:
        return self.w.shape[0]


def fit_ridge(X: np.ndarray, y: np.ndarray, sigma: float = DEFAULT_SIGMA) -> RidgeModel:
    """
    Solve (Xc^T Xc + sigma I) w = Xc^T yc on column-centered data.

    The intercept is recovered as b = mean(y) - w . mean(X), so it is never
    shrunk. Duplicate rows count with multiplicity.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float).ravel()
    if X.shape[0] < 1:
        raise ValueError("fit_ridge needs at least one row")
    if y.shape[0] != X.shape[0]:
        raise ValueError(f"X has {X.shape[0]} rows but y has {y.shape[0]} values")
    if sigma < 0:
        raise ValueError(f"sigma must be nonnegative, got {sigma}")
    if not (np.isfinite(X).all() and np.isfinite(y).all()):
        raise ValueError("fit_ridge inputs must be finite")

    x_mean = X.mean(axis=0)
    y_mean = y.mean()
    Xc = X - x_mean
    yc = y - y_mean

    d = X.shape[1]
    if sigma == 0 and np.linalg.matrix_rank(Xc) < d:
        raise SingularSystemError(
            f"Centered design has rank {np.linalg.matrix_rank(Xc)} < {d}; use sigma > 0"
        )

    gram = Xc.T @ Xc + sigma * np.eye(d)
    rhs = Xc.T @ yc
    try:
        w = linalg.cho_solve(linalg.cho_factor(gram, lower=True), rhs)
    except linalg.LinAlgError as e:
        raise SingularSystemError(f"Ridge system is not positive definite (sigma={sigma})") from e

    b = float(y_mean - w @ x_mean)
    return RidgeModel(w=np.asarray(w, dtype=float), b=b, sigma=float(sigma))


def predict(model: RidgeModel, X: np.ndarray) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != model.d:
        raise ValueError(f"Model expects {model.d} features, got {X.shape[1]}")
    return X @ model.w + model.b


def bootstrap_committee(
    X: np.ndarray,
    y: np.ndarray,
    P: int,
    rng: np.random.Generator,
    sigma: float = DEFAULT_SIGMA,
) -> List[RidgeModel]:
    """Fit P ridge models, each on m rows drawn with replacement, in draw order."""
    if P < 2:
        raise ValueError(f"Committee size must be at least 2, got {P}")
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float).ravel()
    m = X.shape[0]
    if m < 1:
        raise ValueError("bootstrap_committee needs at least one labeled row")

    committee = []
    for _ in range(P):
        rows = rng.integers(0, m, size=m)
        committee.append(fit_ridge(X[rows], y[rows], sigma))
    return committee


def committee_predictions(committee: List[RidgeModel], X: np.ndarray) -> np.ndarray:
    """P x n matrix of member predictions."""
    return np.vstack([predict(member, X) for member in committee])
