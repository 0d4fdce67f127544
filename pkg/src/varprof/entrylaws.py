"""Entry distributions of the form ``u(Z)`` with ``Z`` standard Gaussian, and
the random matrices built from them.

Draws are counter based: the stream for replica ``r`` of an experiment seeded
with ``s`` is a Philox generator keyed by ``(s, r)``, and entry ``(i, j)`` of
an ``n x n`` draw consumes the ``(i n + j)``-th 64-bit output, mapped to a
Gaussian by inverse-CDF. Replicas can therefore be generated in any order.
"""

from __future__ import annotations

import math
import re
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import ndtr, ndtri

from varprof.errors import DomainError
from varprof.profiles.core import as_array

GRID = np.arange(-8.0, 8.0 + 5e-4, 1e-3)
BOUND_SLACK = 1e-9


class NonCompliantLawWarning(UserWarning):
    """Raised when a theorem-facing computation uses a law that is not symmetric with unit variance."""


@dataclass(frozen=True, eq=False)
class EntryLaw:
    """Law of ``u(Z)`` with ``|u'| <= c1`` and ``|u''| <= c2``.

    ``du``/``d2u`` are optional analytic derivatives; finite differences on
    the verification grid are used when they are missing.
    """

    name: str
    transform: Callable[[np.ndarray], np.ndarray]
    c1: float
    c2: float
    is_symmetric_law: bool
    variance: float
    mean: float = 0.0
    du: Callable[[np.ndarray], np.ndarray] | None = field(default=None, repr=False)
    d2u: Callable[[np.ndarray], np.ndarray] | None = field(default=None, repr=False)

    @property
    def compliant(self) -> bool:
        """Symmetric with unit variance, as the CLT bound requires."""
        return self.is_symmetric_law and abs(self.variance - 1.0) < 1e-12

    def __call__(self, z):
        return self.transform(np.asarray(z, dtype=np.float64))

    def derivative_extrema(self, grid=GRID) -> tuple[float, float]:
        """Grid maxima of ``|u'|`` and ``|u''|``."""
        if self.du is not None:
            d1 = self.du(grid)
        else:
            d1 = np.gradient(self(grid), grid)
        if self.d2u is not None:
            d2 = self.d2u(grid)
        else:
            d2 = np.gradient(d1, grid)
        return float(np.max(np.abs(d1))), float(np.max(np.abs(d2)))

    def verify(self, grid=GRID) -> dict:
        """Check the derivative bounds and, for symmetric laws, oddness of ``u`` on ``grid``."""
        m1, m2 = self.derivative_extrema(grid)
        u = self(grid)
        odd = bool(np.array_equal(self(-grid), -u)) if self.is_symmetric_law else None
        return {
            "max_du": m1,
            "max_d2u": m2,
            "c1_ok": m1 <= self.c1 * (1 + BOUND_SLACK),
            "c2_ok": m2 <= self.c2 * (1 + BOUND_SLACK) + (BOUND_SLACK if self.c2 == 0 else 0),
            "odd": odd,
        }

    def sample(self, size, rng=None) -> np.ndarray:
        rng = np.random.default_rng(rng)
        return self(rng.standard_normal(size))

    def warn_if_noncompliant(self, context: str) -> list[str]:
        if self.compliant:
            return []
        msg = (f"{context}: law {self.name!r} is not theorem-compliant "
               f"(symmetric={self.is_symmetric_law}, variance={self.variance:.6g})")
        warnings.warn(msg, NonCompliantLawWarning, stacklevel=3)
        return [msg]


def law_gaussian() -> EntryLaw:
    return EntryLaw("gaussian", lambda z: z, c1=1.0, c2=0.0, is_symmetric_law=True, variance=1.0,
                    du=np.ones_like, d2u=np.zeros_like)


_SQRT2PI = math.sqrt(2 * math.pi)


def _phi(z):
    return np.exp(-0.5 * z * z) / _SQRT2PI


def law_uniform01() -> EntryLaw:
    """Uniform on ``[0, 1]`` as ``Phi(Z)``; illustrative only, not symmetric and variance 1/12."""
    return EntryLaw("uniform01", ndtr, c1=1 / _SQRT2PI, c2=1 / math.sqrt(2 * math.pi * math.e),
                    is_symmetric_law=False, variance=1 / 12, mean=0.5,
                    du=_phi, d2u=lambda z: -z * _phi(z))


def smooth_symmetric_variance(eps: float) -> float:
    """``Var(Z + eps sin Z)`` in closed form."""
    return 1 + 2 * eps * math.exp(-0.5) + eps * eps * (1 - math.exp(-2)) / 2


def law_smooth_symmetric(eps: float) -> EntryLaw:
    """``u(z) = beta (z + eps sin z)`` with ``beta`` normalising the variance to one."""
    if not 0 <= eps < 1:
        raise DomainError(f"eps must lie in [0, 1), got {eps}")
    beta = 1 / math.sqrt(smooth_symmetric_variance(eps))
    if eps == 0:
        return law_gaussian()
    return EntryLaw(
        f"smooth-symmetric:eps={eps:g}",
        lambda z: beta * (z + eps * np.sin(z)),
        c1=beta * (1 + eps),
        c2=beta * eps,
        is_symmetric_law=True,
        variance=1.0,
        du=lambda z: beta * (1 + eps * np.cos(z)),
        d2u=lambda z: -beta * eps * np.sin(z),
    )


_SMOOTH_RE = re.compile(r"^smooth-symmetric:eps=([0-9.eE+-]+)$")


def parse_law(spec: str) -> EntryLaw:
    """Parse ``gaussian``, ``uniform01`` or ``smooth-symmetric:eps=<v>``."""
    s = spec.strip().lower()
    if s == "gaussian":
        return law_gaussian()
    if s == "uniform01":
        return law_uniform01()
    match = _SMOOTH_RE.match(s)
    if match:
        try:
            eps = float(match.group(1))
        except ValueError:
            raise DomainError(f"bad eps in law string {spec!r}") from None
        return law_smooth_symmetric(eps)
    raise DomainError(f"unknown law {spec!r}; expected gaussian, uniform01 or smooth-symmetric:eps=<v>")


@dataclass(frozen=True)
class MatrixEnsemble:
    """i.i.d. (``rho = 0``) or symmetric (``rho = 1``) random matrices with a given entry law."""

    kind: str
    law: EntryLaw
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("iid", "symmetric"):
            raise DomainError(f"ensemble kind must be 'iid' or 'symmetric', got {self.kind!r}")
        if not 0 <= self.seed < 2 ** 64:
            raise DomainError("seed must fit in an unsigned 64-bit integer")

    @property
    def rho(self) -> int:
        return 1 if self.kind == "symmetric" else 0

    def with_seed(self, seed: int) -> "MatrixEnsemble":
        return MatrixEnsemble(self.kind, self.law, seed)


def gaussian_stream(seed: int, replica: int, count: int) -> np.ndarray:
    """The first ``count`` standard Gaussians of the ``(seed, replica)`` stream."""
    bitgen = np.random.Philox(key=np.array([seed, replica], dtype=np.uint64))
    raw = bitgen.random_raw(count)
    u = ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0 ** -53
    return ndtri(u)


def sample_matrix(ens: MatrixEnsemble, n: int, replica: int = 0) -> np.ndarray:
    """Draw replica ``replica`` of an ``n x n`` matrix from ``ens``.

    Symmetric draws take the upper triangle (diagonal included) and mirror it,
    so ``X == X.T`` holds bit for bit.
    """
    if n < 1:
        raise DomainError("n must be positive")
    if replica < 0:
        raise DomainError("replica index must be non-negative")
    x = ens.law(gaussian_stream(ens.seed, replica, n * n)).reshape(n, n)
    if ens.kind == "symmetric":
        upper = np.triu(x)
        x = upper + np.triu(x, 1).T
    return x


def assemble(A, X) -> np.ndarray:
    """``Y = A ∘ X``."""
    a = as_array(A)
    X = np.asarray(X)
    if a.shape != X.shape:
        raise DomainError(f"profile shape {a.shape} does not match matrix shape {X.shape}")
    return a * X
