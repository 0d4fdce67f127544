"""Distances between standardised samples and the standard normal law.

Total variation is not estimable from raw samples without smoothing, so the
binned version is reported next to its own Monte Carlo noise floor; the
Kolmogorov-Smirnov statistic is the one used for pass/fail thresholds.
"""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np
from scipy.special import kolmogi, ndtr

from varprof.errors import DomainError, StructuralZeroVariance

DEFAULT_BINS = 50
DEFAULT_RANGE = (-6.0, 6.0)
_INV_SQRT2PI = 1 / np.sqrt(2 * np.pi)


def _samples(x):
    x = np.asarray(x, dtype=np.float64).ravel()
    if x.size == 0:
        raise DomainError("no samples given")
    if not np.all(np.isfinite(x)):
        raise DomainError("samples must be finite")
    return x


def ks_to_normal(samples) -> float:
    """``sup_x |F_emp(x) - Phi(x)|`` for the two-sided empirical CDF."""
    x = np.sort(_samples(samples))
    R = x.size
    if R < 2:
        raise DomainError("KS statistic needs at least two samples")
    cdf = ndtr(x)
    i = np.arange(1, R + 1)
    return float(max(np.max(i / R - cdf), np.max(cdf - (i - 1) / R)))


def binned_masses(samples, bins: int = DEFAULT_BINS, range_=DEFAULT_RANGE):
    """Bin edges, empirical and normal masses per bin, and the two tail masses of each."""
    x = _samples(samples)
    if bins < 10:
        raise DomainError("use at least 10 bins")
    lo, hi = range_
    if not lo < hi:
        raise DomainError("empty binning range")
    edges = np.linspace(lo, hi, bins + 1)
    counts, _ = np.histogram(x, bins=edges)
    emp = counts / x.size
    norm = np.diff(ndtr(edges))
    emp_tails = (np.mean(x < lo), np.mean(x > hi))
    norm_tails = (float(ndtr(lo)), float(ndtr(-hi)))
    return edges, emp, norm, emp_tails, norm_tails


def tv_binned_to_normal(samples, bins: int = DEFAULT_BINS, range_=DEFAULT_RANGE) -> float:
    """Half the L1 distance between binned empirical and normal masses, tails included."""
    _, emp, norm, et, nt = binned_masses(samples, bins, range_)
    l1 = np.abs(emp - norm).sum() + abs(et[0] - nt[0]) + abs(et[1] - nt[1])
    return float(min(1.0, 0.5 * l1))


def _partial_w1(x, a, b):
    """``int_a^b (x - z) phi(z) dz``."""
    with np.errstate(invalid="ignore", over="ignore"):
        pa = np.where(np.isinf(a), 0.0, np.exp(-0.5 * a * a) * _INV_SQRT2PI)
        pb = np.where(np.isinf(b), 0.0, np.exp(-0.5 * b * b) * _INV_SQRT2PI)
    return x * (ndtr(b) - ndtr(a)) + pb - pa


def w1_to_normal(samples) -> float:
    """Wasserstein-1 distance under the quantile coupling, computed exactly.

    On the quantile interval of the i-th order statistic the normal quantile
    runs over ``[z_{i-1}, z_i]``; the integral of ``|x_i - z| phi(z)`` there is
    closed form.
    """
    from scipy.special import ndtri

    x = np.sort(_samples(samples))
    R = x.size
    z = ndtri(np.arange(R + 1) / R)  # -inf .. +inf
    a, b = z[:-1], z[1:]
    below = x <= a
    above = x >= b
    mid = ~(below | above)
    total = np.zeros(R)
    total[below] = -_partial_w1(x[below], a[below], b[below])
    total[above] = _partial_w1(x[above], a[above], b[above])
    xm = x[mid]
    total[mid] = _partial_w1(xm, a[mid], xm) - _partial_w1(xm, xm, b[mid])
    return float(total.sum())


@lru_cache(maxsize=32)
def noise_floors(R: int, bins: int = DEFAULT_BINS, range_=DEFAULT_RANGE, reps: int = 200,
                 seed: int = 20240101) -> dict:
    """Mean and 95% quantile of each metric for exact normal samples of size ``R``.

    KS also gets the asymptotic Kolmogorov values for comparison.
    """
    rng = np.random.default_rng(seed)
    ks, tv, w1 = [], [], []
    for _ in range(reps):
        x = rng.standard_normal(R)
        ks.append(ks_to_normal(x))
        tv.append(tv_binned_to_normal(x, bins, range_))
        w1.append(w1_to_normal(x))
    out = {}
    for name, vals in (("ks", ks), ("tv_binned", tv), ("w1", w1)):
        vals = np.asarray(vals)
        out[name] = {"mean": float(vals.mean()), "q95": float(np.quantile(vals, 0.95))}
    out["ks"]["kolmogorov_q95"] = float(kolmogi(0.05) / np.sqrt(R))
    return out


@dataclass
class GofReport:
    ks: float
    tv_binned: float
    w1: float
    sample_size: int
    bins: int
    range: tuple[float, float]
    noise_floors: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)


def gof_suite(batch, bins: int = DEFAULT_BINS, range_=DEFAULT_RANGE, floors: bool = True) -> GofReport:
    """All three metrics for a standardised batch (or a plain sample array)."""
    z = getattr(batch, "z_samples", batch)
    z = _samples(z)
    if z.size < 2:
        raise DomainError("a batch of at least two replicas is required")
    if np.allclose(z, z[0]):
        raise StructuralZeroVariance("batch is constant; nothing to compare")
    fl = noise_floors(int(z.size), bins, tuple(range_)) if floors else {}
    return GofReport(ks_to_normal(z), tv_binned_to_normal(z, bins, range_), w1_to_normal(z),
                     int(z.size), bins, tuple(range_), fl)


def write_histogram_csv(samples, path, bins: int = DEFAULT_BINS, range_=DEFAULT_RANGE) -> Path:
    """``bin_left,bin_right,emp_mass,normal_mass`` rows for offline plotting."""
    edges, emp, norm, _, _ = binned_masses(samples, bins, range_)
    path = Path(path)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["bin_left", "bin_right", "emp_mass", "normal_mass"])
        for lo, hi, e, nm in zip(edges[:-1], edges[1:], emp, norm):
            writer.writerow([repr(float(lo)), repr(float(hi)), repr(float(e)), repr(float(nm))])
    return path
