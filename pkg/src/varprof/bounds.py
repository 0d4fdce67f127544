"""Ingredients of the total-variation bound for ``Z_k(A ∘ X)``.

All values are reported without the unspecified universal constants; the
norm check can optionally scale its budget by a calibrated ``K_cal``, which
is an empirical fit and not a derived quantity.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from varprof.cycles import cycle_sum_dfs
from varprof.entrylaws import MatrixEnsemble, assemble, sample_matrix
from varprof.errors import BoundVacuous, DomainError
from varprof.profiles.core import as_array
from varprof.simulate import PolynomialSpec, moment_summary, sample_traces

CSV_FIELDS = ("n", "k", "max_a", "b_n", "s_k", "rhs")


def _entries(A):
    return as_array(A)


def compute_bn(A) -> float:
    """Largest row or column sum of squares, floored at ``log n`` (natural log)."""
    a = _entries(A)
    sq = a * a
    n = a.shape[0]
    return float(max(sq.sum(axis=1).max(), sq.sum(axis=0).max(), math.log(n)))


def norm_budget(A) -> float:
    """``max_i ||row_i|| + max_j ||col_j|| + max|a_ij| sqrt(log n)``: the part of the
    norm bound multiplied by the universal constant."""
    a = _entries(A)
    sq = a * a
    n = a.shape[0]
    return float(np.sqrt(sq.sum(axis=1).max()) + np.sqrt(sq.sum(axis=0).max())
                 + a.max() * math.sqrt(math.log(n)))


def _f1_majorant(k, lam):
    return k * k * lam ** (k - 1)


def _f2_majorant(k, lam):
    return k ** 3 * lam ** (k - 2) if k >= 2 else 0.0


def kappa_diagnostics(A, k: int, lambda_cap: float | None = None) -> tuple[float, float, float]:
    """Constant-free majorants ``(kappa0, kappa1, kappa2)``.

    The operator norm is replaced by ``lambda_cap`` (default ``sqrt(b_n)``) and
    the rank by ``n``; with ``gamma0, gamma1 <= max|a_ij|`` and ``gamma2 = 0``:

        kappa0 = max_a^2 f1(lam)^2 sqrt(n)
        kappa1 = max_a f1(lam) sqrt(n)
        kappa2 = max_a^2 f2(lam)

    where ``f1(lam) = k^2 lam^(k-1)`` and ``f2(lam) = k^3 lam^(k-2)`` (zero for k = 1).
    """
    if k < 1:
        raise DomainError("k must be positive")
    a = _entries(A)
    n = a.shape[0]
    lam = math.sqrt(compute_bn(A)) if lambda_cap is None else float(lambda_cap)
    if lam < 1:
        raise DomainError(f"lambda_cap must be at least 1, got {lam}")
    max_a = float(a.max())
    f1 = _f1_majorant(k, lam)
    eta0 = max_a * f1
    eta1 = max_a * f1 * math.sqrt(n)
    eta2 = max_a ** 2 * _f2_majorant(k, lam)
    return eta0 * eta1, eta1, eta2


@dataclass
class BoundReport:
    n: int
    k: int
    max_a: float
    b_n: float
    s_k: float
    rhs: float
    kappa0: float
    kappa1: float
    kappa2: float
    sigma2_lower: float
    norm_budget: float

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    def csv_row(self) -> list:
        return [self.n, self.k] + [repr(float(getattr(self, f))) for f in CSV_FIELDS[2:]]


def tv_bound_rhs(A, k: int, s_k: float | None = None) -> BoundReport:
    """Evaluate ``max_a^2 k^5 sqrt(n) b_n^(k-1) / S_k(A)`` and its diagnostics.

    Raises BoundVacuous when ``S_k(A) = 0``.
    """
    a = _entries(A)
    if a.shape[0] != a.shape[1]:
        raise DomainError("the bound is defined for square profiles")
    n = a.shape[0]
    if s_k is None:
        s_k = cycle_sum_dfs(A, k).value
    if s_k <= 0:
        raise BoundVacuous(f"S_{k}(A) = 0: the bound is uninformative")
    b_n = compute_bn(A)
    max_a = float(a.max())
    rhs = max_a ** 2 * k ** 5 * math.sqrt(n) * b_n ** (k - 1) / s_k
    kappas = kappa_diagnostics(A, k, max(1.0, math.sqrt(b_n)))
    return BoundReport(n, k, max_a, b_n, s_k, rhs, *kappas, sigma2_lower=s_k,
                       norm_budget=norm_budget(A))


def spectral_norm(Y, tol: float = 1e-8, max_iter: int = 5000, seed: int = 0):
    """Largest singular value of ``Y`` by power iteration on ``Y^T Y``.

    Returns ``(sigma, converged, iterations)``; convergence means the relative
    change of the estimate fell below ``tol``.
    """
    Y = np.asarray(Y, dtype=np.float64)
    # iterate on Y / max|Y| so that Y^T Y neither underflows nor overflows
    scale = float(np.abs(Y).max()) if Y.size else 0.0
    if scale == 0.0:
        return 0.0, True, 0
    Y = Y / scale
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(Y.shape[1])
    v /= np.linalg.norm(v)
    sigma = 0.0
    for it in range(1, max_iter + 1):
        w = Y @ v
        new = float(np.linalg.norm(w))
        if new == 0.0:
            return 0.0, True, it
        v = Y.T @ w
        v /= np.linalg.norm(v)
        if abs(new - sigma) <= tol * new:
            return new * scale, True, it
        sigma = new
    return sigma * scale, False, max_iter


def norm_check(A, ens: MatrixEnsemble, trials: int, t: float, k_cal: float = 1.0,
               seed: int | None = None) -> dict:
    """Sample ``||A ∘ X||`` and compare with the deterministic budget and tail bound.

    ``budget = k_cal * norm_budget(A) + sqrt(2) c1 sqrt(log n)``. Reported
    exceedances: of ``budget + t``, and of ``mean + t`` (the concentration form,
    to be compared with ``exp(-t^2 / c1^2)``). Non-converged trials are
    excluded and counted.
    """
    if trials < 30:
        raise DomainError("norm_check needs at least 30 trials")
    if seed is not None:
        ens = ens.with_seed(seed)
    a = _entries(A)
    n = a.shape[0]
    c1 = ens.law.c1
    budget = k_cal * norm_budget(A) + math.sqrt(2) * c1 * math.sqrt(math.log(n))
    norms, frob, iters = [], [], []
    failed = 0
    for r in range(trials):
        y = assemble(a, sample_matrix(ens, n, r))
        sigma, ok, it = spectral_norm(y, seed=r)
        if not ok:
            failed += 1
            continue
        norms.append(sigma)
        frob.append(float(np.linalg.norm(y)))
        iters.append(it)
    norms = np.array(norms)
    b_n = compute_bn(A)
    mean = float(norms.mean()) if norms.size else float("nan")
    return {
        "n": n,
        "trials": trials,
        "nonconverged": failed,
        "t": t,
        "c1": c1,
        "k_cal": k_cal,
        "budget": budget,
        "norms": norms.tolist(),
        "mean_norm": mean,
        "max_norm_over_sqrt_bn": float((norms / math.sqrt(b_n)).max()) if norms.size else float("nan"),
        "exceed_budget": float(np.mean(norms > budget + t)) if norms.size else float("nan"),
        "exceed_mean": float(np.mean(norms > mean + t)) if norms.size else float("nan"),
        "tail_bound": math.exp(-t * t / (c1 * c1)),
        "below_frobenius": bool(np.all(norms <= np.array(frob) * (1 + 1e-12))),
        "iterations_max": int(max(iters)) if iters else 0,
    }


def calibrate_norm_constant(ns=(50, 100, 200), trials: int = 40, quantile: float = 0.99,
                            seed: int = 0) -> float:
    """Empirical ``K_cal`` for the norm budget from all-ones Gaussian baselines.

    For each size the ``quantile`` of ``(||A ∘ X|| - sqrt(2 log n)) / norm_budget(A)``
    is taken over symmetric Gaussian draws; the largest one is returned. This is
    a fitted constant, not a theoretical one.
    """
    from varprof.entrylaws import law_gaussian
    from varprof.profiles import all_ones

    ens = MatrixEnsemble("symmetric", law_gaussian(), seed)
    fitted = []
    for n in ns:
        A = all_ones(n)
        rep = norm_check(A, ens, max(trials, 30), t=0.0)
        excess = (np.array(rep["norms"]) - math.sqrt(2 * math.log(n))) / norm_budget(A)
        fitted.append(float(np.quantile(excess, quantile)))
    return max(fitted)


def variance_lower_bound_check(A, ens: MatrixEnsemble, k: int, R: int, seed: int | None = None,
                               workers: int | None = None) -> dict:
    """Monte Carlo check of ``Var(Tr (A ∘ X)^k) >= S_k(A)``.

    Passes when ``var_hat >= S_k (1 - 3 var_se / var_hat)``. Refuses laws that
    are not symmetric with unit variance, for which the inequality is not claimed.
    """
    if not ens.law.compliant:
        raise DomainError(
            f"law {ens.law.name!r} is not symmetric with unit variance; the lower bound does not apply")
    s_k = cycle_sum_dfs(A, k).value
    raw = sample_traces(A, ens, PolynomialSpec.monomial(k), R, seed, workers)
    _, var, _, var_se = moment_summary(raw)
    rel_se = var_se / var if var > 0 else float("inf")
    passes = s_k == 0 or var >= s_k * (1 - 3 * rel_se)
    return {
        "k": k,
        "replicas": R,
        "ensemble": ens.kind,
        "var_hat": var,
        "var_se": var_se,
        "relative_se": rel_se,
        "s_k": s_k,
        "ratio": var / s_k if s_k > 0 else float("inf"),
        "passes": bool(passes),
    }
