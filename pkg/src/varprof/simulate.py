"""Polynomial linear eigenvalue statistics ``Tr P_k(A ∘ X)`` by Monte Carlo.

Traces are taken of explicit matrix powers; no eigenvalue solver is used.
The expectation and variance that standardise ``Z_k`` are themselves Monte
Carlo estimates, so centred samples carry an ``O(R^-1/2)`` centring error.
"""

from __future__ import annotations

import csv
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from varprof.entrylaws import MatrixEnsemble, assemble, sample_matrix
from varprof.errors import DomainError, StructuralZeroVariance
from varprof.profiles.core import as_array

ZERO_VARIANCE_FACTOR = 10.0
WORKERS_ENV = "VARPROF_WORKERS"


def default_workers() -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise DomainError(f"{WORKERS_ENV} must be an integer, got {env!r}") from None
    return os.cpu_count() or 1


@dataclass(frozen=True)
class PolynomialSpec:
    """``P(x) = c_0 + c_1 x + ... + c_k x^k`` with ``c_k != 0`` and ``|c_i| <= tau``."""

    coeffs: tuple[float, ...]
    tau: float | None = None

    def __post_init__(self):
        c = tuple(float(x) for x in self.coeffs)
        if len(c) < 2:
            raise DomainError("polynomial must have degree at least 1")
        if c[-1] == 0:
            raise DomainError("leading coefficient must be nonzero")
        object.__setattr__(self, "coeffs", c)
        bound = max(abs(x) for x in c)
        if self.tau is None:
            object.__setattr__(self, "tau", bound)
        elif bound > self.tau:
            raise DomainError(f"coefficient bound tau={self.tau} violated by max |c_i| = {bound}")

    @classmethod
    def monomial(cls, k: int) -> "PolynomialSpec":
        if k < 1:
            raise DomainError("degree must be at least 1")
        return cls((0.0,) * k + (1.0,))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, x):
        return np.polynomial.polynomial.polyval(x, self.coeffs)

    def compose_power(self, m: int) -> "PolynomialSpec":
        """``x -> P(x^m)``."""
        if m < 1:
            raise DomainError("power must be positive")
        out = [0.0] * (self.degree * m + 1)
        for i, c in enumerate(self.coeffs):
            out[i * m] = c
        return PolynomialSpec(tuple(out), self.tau)

    # Majorant series used in the second-order Poincaré bound.
    def f(self, lam):
        return sum(abs(c) * lam ** i for i, c in enumerate(self.coeffs))

    def f1(self, lam):
        return sum(i * abs(c) * lam ** (i - 1) for i, c in enumerate(self.coeffs) if i >= 1)

    def f2(self, lam):
        return sum(i * (i - 1) * abs(c) * lam ** (i - 2) for i, c in enumerate(self.coeffs) if i >= 2)


def power_traces(M, k: int) -> np.ndarray:
    """``(Tr M, Tr M^2, ..., Tr M^k)`` via repeated multiplication.

    Uses ``Tr M^j = sum((M^(j-1)) ∘ M^T)`` so only ``k - 2`` products are formed.
    """
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DomainError(f"power traces need a square matrix, got shape {M.shape}")
    if k < 1:
        raise DomainError("k must be positive")
    out = np.empty(k)
    out[0] = np.trace(M)
    if k == 1:
        return out
    mt = np.ascontiguousarray(M.T)
    power = M
    for j in range(2, k + 1):
        out[j - 1] = np.sum(power * mt)
        if j < k:
            power = power @ M
    return out


def trace_poly(M, P: PolynomialSpec) -> float:
    """``Tr P(M) = c_0 n + sum_j c_j Tr M^j``."""
    M = np.asarray(M)
    traces = power_traces(M, P.degree)
    return float(P.coeffs[0] * M.shape[0] + np.dot(P.coeffs[1:], traces))


@dataclass
class SampleBatch:
    """Monte Carlo replicas of ``Tr P(A ∘ X)`` and their standardisation."""

    raw_traces: np.ndarray
    mean_hat: float
    var_hat: float
    mean_se: float
    var_se: float
    z_samples: np.ndarray
    fingerprint: dict
    warnings: list[str] = field(default_factory=list)

    @property
    def replicas(self) -> int:
        return self.raw_traces.size

    def summary(self) -> dict:
        return {
            "replicas": self.replicas,
            "mean_hat": self.mean_hat,
            "var_hat": self.var_hat,
            "mean_se": self.mean_se,
            "var_se": self.var_se,
            "fingerprint": self.fingerprint,
            "warnings": self.warnings,
        }


def moment_summary(raw):
    """Sample mean, unbiased variance and their standard errors."""
    raw = np.asarray(raw, dtype=np.float64)
    R = raw.size
    mean = float(raw.mean())
    dev = raw - mean
    var = float(dev @ dev / (R - 1))
    m4 = float(np.mean(dev ** 4))
    var_se = float(np.sqrt(max(m4 - var * var * (R - 3) / (R - 1), 0.0) / R))
    return mean, var, float(np.sqrt(var / R)), var_se


def standardize(raw, context="batch"):
    """Return ``(z, mean, var, mean_se, var_se)``; raise on numerically zero variance."""
    raw = np.asarray(raw, dtype=np.float64)
    if raw.size < 2:
        raise DomainError("at least two replicas are needed to standardise")
    mean, var, mean_se, var_se = moment_summary(raw)
    scale = max(1.0, float(np.max(raw * raw)))
    if var <= ZERO_VARIANCE_FACTOR * np.finfo(float).eps * scale:
        raise StructuralZeroVariance(
            f"{context}: sample variance {var:.3g} is zero at scale {scale:.3g}", raw_traces=raw)
    return (raw - mean) / np.sqrt(var), mean, var, mean_se, var_se


def sample_traces(A, ens: MatrixEnsemble, P: PolynomialSpec, R: int, seed: int | None = None,
                  workers: int | None = None) -> np.ndarray:
    """Raw ``Tr P(A ∘ X)`` for replicas ``0..R-1``, in replica order."""
    if R < 1:
        raise DomainError("replica count must be positive")
    if seed is not None:
        ens = ens.with_seed(seed)
    a = as_array(A)
    if a.shape[0] != a.shape[1]:
        raise DomainError("traces need a square profile")
    n = a.shape[0]

    def one(r):
        return trace_poly(assemble(a, sample_matrix(ens, n, r)), P)

    workers = default_workers() if workers is None else workers
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            return np.fromiter(pool.map(one, range(R)), dtype=np.float64, count=R)
    return np.fromiter(map(one, range(R)), dtype=np.float64, count=R)


def run_batch(A, ens: MatrixEnsemble, P: PolynomialSpec, R: int, seed: int | None = None,
              workers: int | None = None) -> SampleBatch:
    """Simulate ``R`` replicas and standardise them into ``Z_k`` samples.

    Raises StructuralZeroVariance (carrying the raw traces) when every
    replica gives the same trace up to rounding.
    """
    if R < 2:
        raise DomainError("run_batch needs at least two replicas")
    seed = ens.seed if seed is None else seed
    notes = ens.law.warn_if_noncompliant("run_batch")
    raw = sample_traces(A, ens, P, R, seed, workers)
    z, mean, var, mean_se, var_se = standardize(raw, "run_batch")
    fp = {
        "profile": A.fingerprint() if hasattr(A, "fingerprint") else None,
        "law": ens.law.name,
        "ensemble": ens.kind,
        "coeffs": list(P.coeffs),
        "k": P.degree,
        "seed": seed,
        "replicas": R,
    }
    return SampleBatch(raw, mean, var, mean_se, var_se, z, fp, notes)


def export_batch(batch: SampleBatch, stem, header: str | None = None) -> tuple[Path, Path]:
    """Write ``<stem>.csv`` (``replica,raw_trace,z``) and a ``<stem>.json`` sidecar."""
    stem = Path(stem)
    csv_path, json_path = stem.with_suffix(".csv"), stem.with_suffix(".json")
    with open(csv_path, "w", newline="") as fh:
        if header:
            fh.write(header)
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["replica", "raw_trace", "z"])
        for r, (x, z) in enumerate(zip(batch.raw_traces, batch.z_samples)):
            writer.writerow([r, repr(float(x)), repr(float(z))])
    json_path.write_text(json.dumps(batch.summary(), indent=2, sort_keys=True) + "\n")
    return csv_path, json_path


@dataclass
class StructuralZeroReport:
    """Whether ``Tr((A ∘ X)^k)`` is the same for every draw.

    ``constant`` is the numerical verdict over the sampled draws;
    ``support_constant`` is the exact verdict from the support graph (the
    trace is a nonzero polynomial in the entries iff some closed walk of
    length k exists on the support).
    """

    k: int
    constant: bool
    support_constant: bool
    spread: float
    scale: float
    traces: np.ndarray

    def __bool__(self):
        return self.constant


def support_has_closed_walk(A, k: int) -> bool:
    s = (as_array(A) > 0).astype(np.float64)
    reach = s
    for _ in range(k - 1):
        reach = ((reach @ s) > 0).astype(np.float64)
    return bool(np.trace(reach) > 0)


def structural_zero_check(A, k: int, trials: int = 20, ens: MatrixEnsemble | None = None,
                          seed: int = 0, rtol: float = 1e-9) -> StructuralZeroReport:
    """Decide whether ``Tr((A ∘ X)^k)`` is deterministic.

    The trace is sampled over ``trials`` draws; it counts as constant when the
    spread is at most ``rtol`` times the mean of ``||A ∘ X||_F^k``, an upper
    bound on ``|Tr((A ∘ X)^k)|``.
    """
    from varprof.entrylaws import law_gaussian

    if k < 1:
        raise DomainError("k must be positive")
    if ens is None:
        ens = MatrixEnsemble("symmetric" if getattr(A, "symmetric", False) else "iid", law_gaussian())
    ens = ens.with_seed(seed)
    a = as_array(A)
    n = a.shape[0]
    traces = np.empty(trials)
    norms = np.empty(trials)
    for t in range(trials):
        y = assemble(a, sample_matrix(ens, n, t))
        traces[t] = power_traces(y, k)[-1]
        norms[t] = np.linalg.norm(y) ** k
    spread = float(traces.max() - traces.min())
    scale = float(norms.mean())
    return StructuralZeroReport(k, spread <= rtol * scale, not support_has_closed_walk(A, k),
                                spread, scale, traces)
