import numpy as np

from backend.data.loader import Dataset, zscore_normalize


def make_two_blobs(
    n: int = 200,
    d: int = 5,
    separation: float = 10.0,
    spread: float = 0.4,
    noise: float = 0.4,
    weight: float = 0.9,
    seed: int = 0,
    name: str = "two-blobs",
) -> Dataset:
    """
    Two Gaussian blobs with a shared linear target plus Gaussian noise.

    `weight` is the share of samples in the first blob and `spread` the
    per-feature standard deviation inside a blob; blob centres sit
    `separation` apart along a random unit direction. With the defaults the
    second blob is small and tight, so a handful of uniform draws often
    misses it entirely. Returned normalized.
    """
    if not 0 < weight < 1:
        raise ValueError(f"weight must lie in (0, 1), got {weight}")
    if spread <= 0 or noise < 0:
        raise ValueError("spread must be positive and noise nonnegative")
    rng = np.random.default_rng(seed)
    direction = rng.normal(size=d)
    direction /= np.linalg.norm(direction)

    n_first = int(round(weight * n))
    centres = np.where(np.arange(n)[:, None] < n_first, 0.5, -0.5) * separation * direction
    X = centres + spread * rng.normal(size=(n, d))
    beta = rng.normal(size=d)
    y = X @ beta + noise * rng.normal(size=n)
    return zscore_normalize(X, y, [f"x{i}" for i in range(d)], name=name)
