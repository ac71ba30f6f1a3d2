"""Geographic primitives: great-circle distance, power-law distance fitting,
and a small diagonal-bandwidth Gaussian KDE."""

from __future__ import annotations

import logging

import numpy as np

logger = logging.getLogger(__name__)

EARTH_RADIUS_KM = 6371.0

# Distances below ~1 m are treated as 1 m so d**b stays finite for b < 0.
MIN_DISTANCE_KM = 1e-3


def haversine(p1: tuple[float, float], p2: tuple[float, float]) -> float:
    """Great-circle distance in km between two (lat, lon) points in degrees."""
    lat1, lon1 = np.radians(p1)
    lat2, lon2 = np.radians(p2)
    s = (
        np.sin((lat2 - lat1) / 2.0) ** 2
        + np.cos(lat1) * np.cos(lat2) * np.sin((lon2 - lon1) / 2.0) ** 2
    )
    return float(2.0 * EARTH_RADIUS_KM * np.arcsin(np.sqrt(np.clip(s, 0.0, 1.0))))


def haversine_matrix(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pairwise distances in km between rows of two (n, 2) degree arrays."""
    a = np.radians(np.atleast_2d(a))
    b = np.radians(np.atleast_2d(b))
    dlat = a[:, None, 0] - b[None, :, 0]
    dlon = a[:, None, 1] - b[None, :, 1]
    s = (
        np.sin(dlat / 2.0) ** 2
        + np.cos(a[:, None, 0]) * np.cos(b[None, :, 0]) * np.sin(dlon / 2.0) ** 2
    )
    return 2.0 * EARTH_RADIUS_KM * np.arcsin(np.sqrt(np.clip(s, 0.0, 1.0)))


def fit_distance_powerlaw(distances: np.ndarray, n_bins: int = 100) -> tuple[float, float] | None:
    """Least-squares fit of log density vs log distance: Pr[d] = a * d**b.

    The empirical density comes from a histogram over ``n_bins`` log-spaced
    bins (zero-count bins skipped, zero distances excluded). Returns (a, b),
    or None when the sample cannot support a fit (fewer than two distinct
    positive distances or fewer than two occupied bins).
    """
    d = np.asarray(distances, dtype=np.float64)
    d = d[d > 0]
    if d.size < 2 or np.unique(d).size < 2:
        return None
    edges = np.geomspace(d.min(), d.max(), n_bins + 1)
    edges[-1] = np.nextafter(edges[-1], np.inf)  # closed upper edge
    counts, _ = np.histogram(d, bins=edges)
    centers = np.sqrt(edges[:-1] * edges[1:])
    widths = np.diff(edges)
    keep = counts > 0
    if keep.sum() < 2:
        return None
    density = counts[keep] / (d.size * widths[keep])
    slope, intercept = np.polyfit(np.log(centers[keep]), np.log(density), 1)
    return float(np.exp(intercept)), float(slope)


def powerlaw_log_prob(dist_km: np.ndarray, a: float, b: float, floor: float = 1e-12) -> np.ndarray:
    """log of a*d**b with the distance floored and the probability clamped below."""
    d = np.maximum(np.asarray(dist_km, dtype=np.float64), MIN_DISTANCE_KM)
    return np.maximum(np.log(a) + b * np.log(d), np.log(floor))


class DiagonalKde:
    """2-D Gaussian KDE with a per-dimension Scott's-rule bandwidth.

    Unlike a full-covariance KDE this never degenerates on collinear or
    repeated points: each bandwidth is floored at ``bw_floor`` (degrees).
    """

    def __init__(self, points: np.ndarray, bw_floor: float = 1e-4):
        self.points = np.atleast_2d(np.asarray(points, dtype=np.float64))
        n = self.points.shape[0]
        scott = n ** (-1.0 / 6.0)  # d=2: n**(-1/(d+4))
        std = self.points.std(axis=0, ddof=1) if n > 1 else np.zeros(2)
        self.bandwidth = np.maximum(scott * std, bw_floor)

    def evaluate(self, queries: np.ndarray) -> np.ndarray:
        q = np.atleast_2d(np.asarray(queries, dtype=np.float64))
        z = (q[:, None, :] - self.points[None, :, :]) / self.bandwidth
        norm = 2.0 * np.pi * self.bandwidth[0] * self.bandwidth[1]
        return np.exp(-0.5 * (z ** 2).sum(axis=2)).mean(axis=1) / norm


def minmax_normalize(values: np.ndarray) -> np.ndarray:
    """Scale to [0, 1] over the given candidate set; constant input maps to 0."""
    v = np.asarray(values, dtype=np.float64)
    lo, hi = v.min(), v.max()
    if hi <= lo:
        return np.zeros_like(v)
    return (v - lo) / (hi - lo)
