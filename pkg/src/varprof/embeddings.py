"""Block embeddings that turn ``X X^T`` and ``X_1 ... X_m`` statistics into ``A ∘ Y`` form.

Covariance: with ``A = [[0, J], [J^T, 0]]`` (``J`` the ``n x m`` all-ones block)
and ``Y`` symmetric, ``(A ∘ Y)^2 = diag(X X^T, X^T X)``, so

    Tr P(x^2)(A ∘ Y) = 2 Tr P(X X^T) + (m - n) c_0.

Products: with all-ones blocks on the cyclic superdiagonal and ``Y`` i.i.d.,
``(A ∘ Y)^m`` is block diagonal with the cyclic rotations of ``X_1 ... X_m``,
so ``Tr P(x^m)(A ∘ Y) = m Tr P(X_1 ... X_m) + (sum n_r - m n_1) c_0``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from varprof.entrylaws import MatrixEnsemble
from varprof.errors import DomainError
from varprof.profiles.core import FamilyTag, StdDevProfile
from varprof.simulate import PolynomialSpec, run_batch, trace_poly

MAX_DIM_RATIO = 10.0


@dataclass(frozen=True)
class EmbeddingPlan:
    kind: str
    block_dims: tuple[int, ...]
    poly: PolynomialSpec
    composed_poly: PolynomialSpec
    host_profile: StdDevProfile

    @property
    def power(self) -> int:
        return 2 if self.kind == "covariance" else len(self.block_dims)

    @property
    def ensemble_kind(self) -> str:
        return "symmetric" if self.kind == "covariance" else "iid"

    @property
    def offsets(self) -> np.ndarray:
        return np.concatenate([[0], np.cumsum(self.block_dims)])

    def block_shapes(self) -> list[tuple[int, int]]:
        d = self.block_dims
        if self.kind == "covariance":
            return [(d[0], d[1])]
        return [(d[r], d[(r + 1) % len(d)]) for r in range(len(d))]

    def describe(self) -> dict:
        return {"kind": self.kind, "block_dims": list(self.block_dims),
                "coeffs": list(self.poly.coeffs), "composed": list(self.composed_poly.coeffs),
                "host": self.host_profile.describe()}


def plan_covariance(n: int, m: int, P: PolynomialSpec) -> EmbeddingPlan:
    if n < 1 or m < 1:
        raise DomainError(f"covariance dimensions must be positive (got n={n}, m={m})")
    host = np.zeros((n + m, n + m))
    host[:n, n:] = 1.0
    host[n:, :n] = 1.0
    profile = StdDevProfile(host, symmetric=True, family_tag=FamilyTag.CUSTOM,
                            params={"embedding": "covariance", "n": n, "m": m})
    return EmbeddingPlan("covariance", (n, m), P, P.compose_power(2), profile)


def plan_product(dims, P: PolynomialSpec, max_ratio: float = MAX_DIM_RATIO) -> EmbeddingPlan:
    """Host for ``X_1 ... X_m`` with ``X_r`` of shape ``n_r x n_{r+1}`` (cyclically).

    The dimension list is rotated so that ``n_1`` is the smallest, which leaves
    the traces of powers of the product unchanged.
    """
    dims = [int(d) for d in dims]
    if len(dims) < 2:
        raise DomainError("a product needs at least two factors")
    if min(dims) < 1:
        raise DomainError("factor dimensions must be positive")
    if max(dims) / min(dims) > max_ratio:
        raise DomainError(f"dimension ratio {max(dims) / min(dims):.3g} exceeds {max_ratio}")
    start = dims.index(min(dims))
    dims = dims[start:] + dims[:start]
    m = len(dims)
    off = np.concatenate([[0], np.cumsum(dims)])
    host = np.zeros((off[-1], off[-1]))
    for r in range(m):
        c = (r + 1) % m
        host[off[r]:off[r + 1], off[c]:off[c + 1]] = 1.0
    profile = StdDevProfile(host, symmetric=bool(np.array_equal(host, host.T)),
                            family_tag=FamilyTag.CUSTOM, params={"embedding": "product", "dims": dims})
    return EmbeddingPlan("product", tuple(dims), P, P.compose_power(m), profile)


def embed(plan: EmbeddingPlan, X_blocks) -> np.ndarray:
    """Place the factor blocks into the host matrix ``A ∘ Y``."""
    shapes = plan.block_shapes()
    X_blocks = [np.asarray(x, dtype=np.float64) for x in X_blocks]
    if len(X_blocks) != len(shapes) or any(x.shape != s for x, s in zip(X_blocks, shapes)):
        raise DomainError(f"expected blocks of shapes {shapes}, got {[x.shape for x in X_blocks]}")
    off = plan.offsets
    N = off[-1]
    y = np.zeros((N, N))
    if plan.kind == "covariance":
        n = plan.block_dims[0]
        y[:n, n:] = X_blocks[0]
        y[n:, :n] = X_blocks[0].T
    else:
        m = len(plan.block_dims)
        for r, x in enumerate(X_blocks):
            c = (r + 1) % m
            y[off[r]:off[r + 1], off[c]:off[c + 1]] = x
    return plan.host_profile.entries * y


def embedded_statistic(plan: EmbeddingPlan, X_blocks) -> tuple[float, float]:
    """``(m Tr P(prod), c_0 offset)`` where ``prod`` is ``X X^T`` or ``X_1 ... X_m``."""
    if plan.kind == "covariance":
        x = np.asarray(X_blocks[0], dtype=np.float64)
        prod = x @ x.T
    else:
        prod = X_blocks[0]
        for x in X_blocks[1:]:
            prod = prod @ x
    mult = plan.power
    offset = plan.poly.coeffs[0] * (sum(plan.block_dims) - mult * plan.block_dims[0])
    return mult * trace_poly(prod, plan.poly), offset


def verify_trace_identity(plan: EmbeddingPlan, X_blocks, k: int | None = None,
                          include_offset: bool = True) -> float:
    """Relative residual ``|LHS - RHS| / (1 + |RHS|)`` of the embedding trace identity.

    ``k`` is optional and only checked against the plan's polynomial degree.
    ``include_offset=False`` drops the constant-term correction; a nonzero
    ``c_0`` then leaves a residual of ``|offset| / (1 + |RHS|)``.
    """
    if k is not None and k != plan.poly.degree:
        raise DomainError(f"plan polynomial has degree {plan.poly.degree}, not {k}")
    lhs = trace_poly(embed(plan, X_blocks), plan.composed_poly)
    main, offset = embedded_statistic(plan, X_blocks)
    rhs = main + (offset if include_offset else 0.0)
    return abs(lhs - rhs) / (1 + abs(rhs))


def zk_via_embedding(plan: EmbeddingPlan, ens: MatrixEnsemble, R: int, seed: int | None = None,
                     workers: int | None = None):
    """Sample ``Z_k`` of the embedded statistic through the host profile.

    Only the law and seed of ``ens`` are used; the ensemble kind is dictated by
    the plan (symmetric host for covariance, i.i.d. host for products).
    """
    if not ens.law.compliant:
        raise DomainError(f"law {ens.law.name!r} is not symmetric with unit variance")
    host_ens = MatrixEnsemble(plan.ensemble_kind, ens.law, ens.seed if seed is None else seed)
    return run_batch(plan.host_profile, host_ens, plan.composed_poly, R, workers=workers)
