"""Spatial and temporal statistics for geolocated political-violence events."""

from ._core import (
    EARTH_RADIUS_KM,
    Error,
    __version__,
    clark_evans,
    default_stopwords,
    distribution_stats,
    flag_outliers,
    geo_distance,
    kmeans_geo,
    knn_classify,
    knn_evaluate,
    monte_carlo_csr,
    nn_distances,
    parse_events,
    per_capita_ratio,
    point_in_polygon,
    run_cli,
    share_with_at_least,
    term_frequencies,
    tokenize,
    z_scores,
)

__all__ = [
    "EARTH_RADIUS_KM",
    "Error",
    "__version__",
    "clark_evans",
    "default_stopwords",
    "distribution_stats",
    "flag_outliers",
    "geo_distance",
    "kmeans_geo",
    "knn_classify",
    "knn_evaluate",
    "monte_carlo_csr",
    "nn_distances",
    "parse_events",
    "per_capita_ratio",
    "point_in_polygon",
    "run_cli",
    "share_with_at_least",
    "term_frequencies",
    "tokenize",
    "z_scores",
]
