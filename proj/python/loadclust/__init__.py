"""Clustering frameworks for household load profiles."""

import json as _json

from ._loadclust import (  # noqa: F401
    ArgumentError,
    ConfigError,
    DegenerateError,
    Error,
    FormatError,
    InvalidValueError,
    PreconditionError,
    agglomerative,
    calinski_harabasz,
    csv_profiles,
    davies_bouldin,
    detect_elbow,
    dunn_index,
    elbow_k_for_ac,
    estimate_fuzzifier,
    fcm,
    feature_agglomeration,
    fpc_sweep,
    gap_statistic,
    kmeans,
    pca,
    silhouette,
    spectral,
    synthetic_profiles,
    xie_beni,
    xie_beni_fuzzy,
)
from . import _loadclust


def default_config():
    """Every recognised config key with its default value."""
    return _json.loads(_loadclust._default_config())


def compare(config=None, output=None):
    """Runs every configured framework end to end and returns the report as a dict.

    `config` is a (partial) config dict; unknown keys raise ConfigError. When
    `output` is given the CSV tables and report.json are written there too.
    """
    text = _loadclust._compare(_json.dumps(config or {}), str(output) if output else "")
    return _json.loads(text)
