"""Cauchy/gamma densities, cyclic count series and per-node degree tables."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, xlogy

from . import _random

FIT_EPSILON = 1e-9
MAX_WEIGHT_RATIO = 1e6


class DomainError(ValueError):
    """Argument outside the support of a density."""


def _finite(name, value):
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value!r}")


@dataclass(frozen=True)
class CauchyParams:
    location: float
    scale: float

    def __post_init__(self):
        _finite("location", self.location)
        _finite("scale", self.scale)
        if self.scale <= 0:
            raise ValueError(f"Cauchy scale must be > 0, got {self.scale}")


@dataclass(frozen=True)
class GammaParams:
    shape: float
    location: float
    scale: float

    def __post_init__(self):
        for name in ("shape", "location", "scale"):
            _finite(name, getattr(self, name))
        if self.shape <= 0:
            raise ValueError(f"gamma shape must be > 0, got {self.shape}")
        if self.scale <= 0:
            raise ValueError(f"gamma scale must be > 0, got {self.scale}")


@dataclass(frozen=True)
class CyclicCountSeries:
    counts: np.ndarray
    total: int
    cycle_length: int

    @property
    def T(self):
        return len(self.counts)


@dataclass(frozen=True)
class DegreeProbabilityTable:
    degrees: np.ndarray
    densities: np.ndarray
    weights: np.ndarray

    def __len__(self):
        return len(self.degrees)

    @property
    def normalized_weights(self):
        return self.weights / self.weights.sum()


def cauchy_pdf(x, params: CauchyParams):
    """Cauchy density ``1 / (pi s (1 + ((x - l) / s)^2))``.

    Accepts a scalar or an array; raises ``ValueError`` on non-finite input.
    """
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError("cauchy_pdf requires finite x")
    z = (arr - params.location) / params.scale
    out = 1.0 / (math.pi * params.scale * (1.0 + z * z))
    return float(out) if out.ndim == 0 else out


def gamma_pdf(x, params: GammaParams):
    """Three-parameter gamma density.

    ``x`` below ``params.location`` raises :class:`DomainError` instead of
    returning zero. For ``shape < 1`` the density at the location is infinite.
    """
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError("gamma_pdf requires finite x")
    if np.any(arr < params.location):
        raise DomainError(
            f"gamma_pdf undefined below location {params.location}")
    z = (arr - params.location) / params.scale
    a = params.shape
    with np.errstate(over="ignore", divide="ignore"):
        logp = xlogy(a - 1.0, z) - z - math.log(params.scale) - gammaln(a)
        out = np.exp(logp)
    return float(out) if out.ndim == 0 else out


def apportion(weights, total):
    """Largest-remainder split of ``total`` integer units over ``weights``.

    Ties in the fractional part go to the lower index. The result always sums
    to ``total`` exactly.
    """
    w = np.asarray(weights, dtype=float)
    total = int(total)
    if total < 0:
        raise ValueError("total must be non-negative")
    if w.size == 0:
        if total:
            raise ValueError("cannot apportion a positive total over nothing")
        return np.zeros(0, dtype=np.int64)
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise ValueError("weights must be finite and non-negative")
    s = w.sum()
    if s <= 0:
        if total:
            raise ValueError("weights sum to zero")
        return np.zeros(w.size, dtype=np.int64)
    quota = w / s * total
    base = np.floor(quota).astype(np.int64)
    short = total - int(base.sum())
    if short > 0:
        order = np.argsort(-(quota - base), kind="stable")
        base[order[:short]] += 1
    elif short < 0:
        # only reachable through rounding in quota; trim the smallest remainders
        order = np.argsort(quota - base, kind="stable")
        order = order[base[order] > 0]
        base[order[:-short]] -= 1
    return base


def cyclic_count_series(total, T, cycle_length, params: CauchyParams):
    """Spread ``total`` units over ``T`` snapshots with a repeating Cauchy profile.

    One cycle of densities is taken at snapshot midpoints ``k + 0.5``, tiled
    ``T // cycle_length`` times and apportioned by largest remainder.
    """
    total, T, cycle_length = int(total), int(T), int(cycle_length)
    if total < 0:
        raise ValueError("total must be non-negative")
    if T < 1 or cycle_length < 1:
        raise ValueError("T and cycle_length must be positive")
    if cycle_length > T:
        raise ValueError(f"cycle_length {cycle_length} exceeds T={T}")
    if T % cycle_length:
        raise ValueError(
            f"T={T} is not a multiple of cycle_length={cycle_length}; pad T")
    one = cauchy_pdf(np.arange(cycle_length) + 0.5, params)
    dens = np.tile(one, T // cycle_length)
    counts = apportion(dens, total)
    counts.flags.writeable = False
    return CyclicCountSeries(counts, total, cycle_length)


def degree_probability_table(n, params: GammaParams, seed,
                             max_weight_ratio=MAX_WEIGHT_RATIO):
    """Draw ``n`` characteristic degrees and their inverse-density weights.

    Weights below ``max(weights) / max_weight_ratio`` are raised to that
    floor so the ratio between extremes stays bounded.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    gen = seed if isinstance(seed, np.random.Generator) else _random.rng(seed)
    degrees = params.location + params.scale * gen.gamma(params.shape, 1.0, n)
    densities = np.asarray(gamma_pdf(degrees, params), dtype=float).reshape(n)
    with np.errstate(divide="ignore"):
        weights = 1.0 / densities
    top = weights.max()
    if not math.isfinite(top):
        raise ValueError("gamma density underflowed to zero; check parameters")
    np.maximum(weights, top / max_weight_ratio, out=weights)
    for a in (degrees, densities, weights):
        a.flags.writeable = False
    return DegreeProbabilityTable(degrees, densities, weights)


def fit_cauchy(samples) -> CauchyParams:
    """Median / half-IQR estimator, the usual robust fit for a Cauchy law."""
    x = np.asarray(samples, dtype=float)
    if x.size < 3:
        raise ValueError("fit_cauchy needs at least 3 samples")
    if not np.all(np.isfinite(x)):
        raise ValueError("samples must be finite")
    q1, med, q3 = np.percentile(x, [25, 50, 75])
    return CauchyParams(float(med), max(float(q3 - q1) / 2.0, FIT_EPSILON))


def fit_gamma(samples, location=None) -> GammaParams:
    """Method-of-moments gamma fit on location-shifted data.

    ``location`` defaults to just below the sample minimum. Population
    moments (``ddof=0``) are used.
    """
    x = np.asarray(samples, dtype=float)
    if x.size < 3:
        raise ValueError("fit_gamma needs at least 3 samples")
    if not np.all(np.isfinite(x)):
        raise ValueError("samples must be finite")
    if location is None:
        location = float(x.min()) - FIT_EPSILON
    shifted = x - location
    if np.any(shifted <= 0):
        raise ValueError("all samples must exceed the gamma location")
    mean = shifted.mean()
    var = shifted.var()
    if var <= 0:
        raise ValueError("zero variance: cannot fit a gamma law")
    return GammaParams(float(mean * mean / var), float(location),
                       float(var / mean))
