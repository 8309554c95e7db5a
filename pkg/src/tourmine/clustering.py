"""K-means clustering of places over geographic + category features.

Features are 12-dimensional: min-max normalized latitude and longitude plus
the ten category flags scaled by a weight. Lloyd iteration with seeded
random-point initialization; ties in assignment go to the lowest cluster id.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin

from .data import PlaceCatalog
from .errors import DimensionMismatch, KTooLarge, MalformedRow
from .seeding import make_rng
from .validation import check_feature_array


def featurize(catalog: PlaceCatalog, category_weight: float = 1.0) -> np.ndarray:
    """One feature vector per place, in item-ordinal order.

    Coordinates are min-max normalized over the catalog; a degenerate range
    (all places sharing a coordinate) maps that dimension to 0.0.
    """
    lats = np.array([p.lat for p in catalog.places])
    lons = np.array([p.lon for p in catalog.places])

    def norm(vals):
        lo, hi = vals.min(), vals.max()
        if hi == lo:
            return np.zeros_like(vals)
        return (vals - lo) / (hi - lo)

    flags = np.array([[float(on) for on in p.categories] for p in catalog.places])
    return np.column_stack([norm(lats), norm(lons), flags * category_weight])


@dataclass
class ClusterModel:
    """Fitted clustering: centroids, per-item assignment, and fit diagnostics."""

    k: int
    centroids: np.ndarray
    assignment: np.ndarray
    inertia: float
    iterations_run: int
    inertia_history: list[float] = field(default_factory=list)

    def items_in(self, cluster: int) -> list[int]:
        return [int(j) for j in np.flatnonzero(self.assignment == cluster)]

    def clusters(self) -> list[list[int]]:
        return [self.items_in(c) for c in range(self.k)]


def _squared_distances(points: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    return ((points[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)


def kmeans(points, k: int, seed: int = 0, tol: float = 1e-6, max_iter: int = 300) -> ClusterModel:
    """Lloyd iteration until the largest centroid displacement drops below tol.

    Initial centroids are k distinct points chosen by the seeded generator.
    An empty cluster is reseeded with the point farthest from its previous
    centroid. Deterministic for fixed inputs and seed.
    """
    pts = check_feature_array(points)
    n = len(pts)
    if not 1 <= k <= n:
        raise KTooLarge(f"k must be in [1, {n}], got {k}")
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")

    rng = make_rng(seed, "kmeans")
    centroids = pts[rng.choice(n, size=k, replace=False)].astype(float).copy()
    history: list[float] = []
    iterations = 0

    def assign(cents):
        d2 = _squared_distances(pts, cents)
        labels = d2.argmin(axis=1)
        for _ in range(k):
            empty = [c for c in range(k) if not np.any(labels == c)]
            if not empty:
                break
            for c in empty:
                cents[c] = pts[int(d2[:, c].argmax())]
            d2 = _squared_distances(pts, cents)
            labels = d2.argmin(axis=1)
        return labels, d2

    for iteration in range(max_iter):
        labels, d2 = assign(centroids)
        history.append(float(d2[np.arange(n), labels].sum()))
        means = centroids.copy()
        for c in range(k):
            members = labels == c
            if members.any():
                means[c] = pts[members].mean(axis=0)
        shift = float(np.sqrt(((means - centroids) ** 2).sum(axis=1)).max())
        centroids = means
        iterations = iteration + 1
        if shift < tol:
            break

    # Final consistency pass so the stored assignment matches the stored
    # centroids exactly.
    d2 = _squared_distances(pts, centroids)
    labels = d2.argmin(axis=1)
    inertia = float(d2[np.arange(n), labels].sum())
    history.append(inertia)
    return ClusterModel(k, centroids, labels.astype(int), inertia, iterations, history)


def assign_point(vector, model: ClusterModel) -> int:
    """Nearest-centroid cluster id for one vector (ties -> lowest id)."""
    v = np.asarray(vector, dtype=float)
    if v.shape != (model.centroids.shape[1],):
        raise DimensionMismatch(
            f"expected a vector of dimension {model.centroids.shape[1]}, got shape {v.shape}"
        )
    return int(((model.centroids - v) ** 2).sum(axis=1).argmin())


class PlaceClusterer(BaseEstimator, ClusterMixin):
    """Estimator wrapper around the Lloyd clusterer (sklearn-compatible)."""

    def __init__(self, k: int = 10, seed: int = 0, tol: float = 1e-6, max_iter: int = 300):
        self.k = k
        self.seed = seed
        self.tol = tol
        self.max_iter = max_iter

    def fit(self, X, y=None):
        self.model_ = kmeans(X, self.k, seed=self.seed, tol=self.tol, max_iter=self.max_iter)
        self.cluster_centers_ = self.model_.centroids
        self.labels_ = self.model_.assignment
        self.inertia_ = self.model_.inertia
        self.n_iter_ = self.model_.iterations_run
        return self

    def predict(self, X):
        pts = check_feature_array(X, expected_dim=self.cluster_centers_.shape[1])
        return _squared_distances(pts, self.cluster_centers_).argmin(axis=1)


# ---------------------------------------------------------------------------
# cluster file I/O: place rows, then a centroid block, then metadata


def clusters_to_csv(model: ClusterModel, catalog: PlaceCatalog) -> str:
    buf = io.StringIO()
    buf.write("place_id,cluster_id\n")
    for j in range(len(model.assignment)):
        buf.write(f"{catalog.id_for(j)},{int(model.assignment[j])}\n")
    dim = model.centroids.shape[1]
    buf.write("centroid_id," + ",".join(f"f{i}" for i in range(dim)) + "\n")
    for c in range(model.k):
        buf.write(str(c) + "," + ",".join(f"{v:.17g}" for v in model.centroids[c]) + "\n")
    buf.write(f"meta,inertia,{model.inertia:.17g}\n")
    buf.write(f"meta,iterations_run,{model.iterations_run}\n")
    return buf.getvalue()


def save_clusters(model: ClusterModel, catalog: PlaceCatalog, path):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(clusters_to_csv(model, catalog))


def load_clusters(path, catalog: PlaceCatalog) -> ClusterModel:
    assignment = np.full(catalog.n, -1, dtype=int)
    centroids: list[list[float]] = []
    inertia, iterations = float("nan"), 0
    section = "places"
    with open(path, encoding="utf-8", newline="") as fh:
        for line_no, row in enumerate(csv.reader(fh), start=1):
            if not row:
                continue
            if row[0] == "place_id":
                continue
            if row[0] == "centroid_id":
                section = "centroids"
                continue
            if row[0] == "meta":
                if row[1] == "inertia":
                    inertia = float(row[2])
                elif row[1] == "iterations_run":
                    iterations = int(row[2])
                continue
            if section == "places":
                assignment[catalog.ordinal_for(int(row[0]))] = int(row[1])
            else:
                centroids.append([float(v) for v in row[1:]])
    if (assignment < 0).any():
        raise MalformedRow(f"{path}: cluster file does not cover every catalog place")
    cents = np.array(centroids)
    return ClusterModel(len(cents), cents, assignment, inertia, iterations)
