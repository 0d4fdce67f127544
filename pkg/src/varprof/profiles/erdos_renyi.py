"""Erdos-Renyi adjacency profiles and their concentration checks."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from varprof.errors import DomainError
from varprof.profiles.core import FamilyTag, StdDevProfile


@dataclass(frozen=True)
class ErdosRenyiConfig:
    """Parameters of ``G(n, p_n)`` together with the exponents that control degree concentration.

    ``gamma`` defaults to the smallest admissible value, ``max(0, -log p / log n)``,
    so that ``p >= n^-gamma`` holds by construction.
    """

    n: int
    p: float
    alpha: float = 0.35
    gamma: float | None = None
    seed: int = 0

    def __post_init__(self):
        if self.n < 2:
            raise DomainError("n must be at least 2")
        if not 0 < self.p <= 1:
            raise DomainError(f"edge probability must lie in (0, 1], got {self.p}")
        if self.gamma is None:
            object.__setattr__(self, "gamma", max(0.0, -math.log(self.p) / math.log(self.n)))
        elif self.p < self.n ** -self.gamma * (1 - 1e-12):
            raise DomainError(f"p = {self.p} is below n^-gamma = {self.n ** -self.gamma:.6g}")
        if not 0 <= self.gamma < 0.5:
            raise DomainError(f"gamma must lie in [0, 1/2), got {self.gamma:.6g}")
        if not self.gamma < self.alpha < 0.5:
            raise DomainError(f"alpha must lie in (gamma, 1/2) = ({self.gamma:.6g}, 0.5), got {self.alpha}")

    @property
    def epsilon(self) -> float:
        """``eps_n = n^-alpha / p_n``."""
        return self.n ** -self.alpha / self.p

    @property
    def row_sum_bound(self) -> float:
        return (1 + self.epsilon) * self.n * self.p


def sample_erdos_renyi(cfg: ErdosRenyiConfig) -> StdDevProfile:
    """Adjacency matrix of a ``G(n, p)`` draw: symmetric 0/1 with zero diagonal."""
    rng = np.random.default_rng(cfg.seed)
    upper = np.triu(rng.random((cfg.n, cfg.n)) < cfg.p, k=1)
    a = (upper | upper.T).astype(np.float64)
    return StdDevProfile(a, symmetric=True, family_tag=FamilyTag.ERDOS_RENYI,
                         params={"n": cfg.n, "p": cfg.p, "seed": cfg.seed})


def check_erdos_renyi_concentration(cfg: ErdosRenyiConfig, k: int, n_graphs: int = 1,
                                    compute_cycle_sums: bool = True) -> dict:
    """Sample ``n_graphs`` graphs (seeds ``cfg.seed, cfg.seed + 1, ...``) and compare
    the normalised cycle sum and maximal degree with their predicted values.

    The report holds per-graph ``ratios`` ``S_k / (n p)^k``, ``max_row_sums``,
    the degree bound ``(1 + eps_n) n p``, the fraction of graphs within it and
    the expected ratio ``|I_k| p^k / (n p)^k``.
    """
    from varprof.cycles import count_Ik, cycle_sum_dfs

    if k < 1:
        raise DomainError("k must be positive")
    ratios, row_max = [], []
    for g in range(n_graphs):
        graph = sample_erdos_renyi(ErdosRenyiConfig(cfg.n, cfg.p, cfg.alpha, cfg.gamma, cfg.seed + g))
        row_max.append(float(graph.entries.sum(axis=1).max()))
        if compute_cycle_sums:
            ratios.append(cycle_sum_dfs(graph, k).value / (cfg.n * cfg.p) ** k)
    bound = cfg.row_sum_bound
    within = [r <= bound for r in row_max]
    return {
        "n": cfg.n,
        "p": cfg.p,
        "k": k,
        "alpha": cfg.alpha,
        "gamma": cfg.gamma,
        "epsilon": cfg.epsilon,
        "ratios": ratios,
        "expected_ratio": count_Ik(cfg.n, k) * cfg.p ** k / (cfg.n * cfg.p) ** k,
        "max_row_sums": row_max,
        "row_sum_bound": bound,
        "fraction_within_bound": sum(within) / len(within),
        "seeds": [cfg.seed + g for g in range(n_graphs)],
    }
