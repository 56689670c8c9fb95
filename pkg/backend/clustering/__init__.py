from .kmeans import (
    DEFAULT_MAX_ITER,
    DEFAULT_RESTARTS,
    Clustering,
    closest_to_centroid,
    kmeans,
)
